"""Nonlocal two-photon state tomography of the swapped pair.

The swapped photons are analyzed through shared optics, so a single triple
of settings (theta_a, phi, theta_b) fixes the measurement bases of both
photons at once: their effective single-photon operators combine the local
waveplate of each arm with the other arm's waveplate and the source phase
imaged through the pair anticorrelation.  Nine such settings yield 16
linearly independent product projections, enough for a complete
reconstruction.

The pipeline is: settings -> effective projectors -> Born probabilities ->
Poissonian coincidence counts -> density-matrix estimate (linear inversion
or likelihood maximization) -> fidelity with bootstrap errors.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.optimize import minimize

from .states import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    Ket,
    fidelity,
    hwp,
    phase_plate,
)

logger = logging.getLogger(__name__)

OUTCOMES = ("hh", "hv", "vh", "vv")

_BASIS_KET = {"h": np.array([1, 0], dtype=complex), "v": np.array([0, 1], dtype=complex)}


@dataclass(frozen=True)
class WaveplateSetting:
    """One analyzer configuration: two waveplate angles and the source phase."""

    id: int
    theta_a: float
    phi: float
    theta_b: float

    @property
    def degrees(self) -> tuple:
        return tuple(round(math.degrees(x), 10) for x in (self.theta_a, self.phi, self.theta_b))


_SETTINGS_DEG = (
    (1, 0.0, 0.0, 0.0),
    (2, 22.5, 0.0, 0.0),
    (3, 22.5, 90.0, 0.0),
    (4, 22.5, 90.0, -22.5),
    (5, 0.0, 90.0, 22.5),
    (6, 0.0, 90.0, 11.25),
    (7, 11.25, 90.0, 0.0),
    (8, 11.25, 90.0, 45.0),
    (9, 45.0, 90.0, 11.25),
)

# (setting id, detector outcome) of each catalog projection, in table order:
# hh hv vh vv | pp mm mp | pl ml | ll lr | rm | and one elliptical pair per
# remaining setting.
_CATALOG_SELECTION = (
    (1, "hh"), (1, "hv"), (1, "vh"), (1, "vv"),
    (2, "vv"), (2, "hh"), (2, "hv"),
    (3, "vh"), (3, "hh"),
    (4, "hh"), (4, "hv"),
    (5, "hh"),
    (6, "hh"),
    (7, "hv"),
    (8, "hh"),
    (9, "vh"),
)


def tomography_settings() -> tuple:
    """The nine analyzer settings, angles in radians."""
    return tuple(
        WaveplateSetting(i, math.radians(ta), math.radians(ph), math.radians(tb))
        for i, ta, ph, tb in _SETTINGS_DEG
    )


def early_photon_operator(theta_a: float, phi: float, theta_b: float) -> np.ndarray:
    """Effective Jones operator acting on the early swapped photon.

    Product R(theta_a) diag(1, e^{i phi}) sx R(theta_b) sx: the local
    waveplate and source phase, composed with the far-arm waveplate imaged
    through the anticorrelated pair.
    """
    return hwp(theta_a) @ phase_plate(phi) @ SIGMA_X @ hwp(theta_b) @ SIGMA_X


def late_photon_operator(theta_a: float, phi: float, theta_b: float) -> np.ndarray:
    """Effective Jones operator acting on the late swapped photon.

    Product R(theta_b) sx diag(1, e^{i phi}) R(theta_a) sx: mirror image of
    :func:`early_photon_operator`, with the phase and near-arm waveplate now
    entering nonlocally.
    """
    return hwp(theta_b) @ SIGMA_X @ phase_plate(phi) @ hwp(theta_a) @ SIGMA_X


@dataclass(frozen=True)
class EffectiveProjector:
    """Product projection measured by one detector pattern of one setting."""

    setting_id: int
    outcome: tuple
    photon1: Ket
    photon4: Ket
    product: Ket = field(repr=False)


def _canonical(vec: np.ndarray) -> np.ndarray:
    vec = vec / np.linalg.norm(vec)
    for a in vec:
        if abs(a) > 1e-9:
            return vec * (a.conjugate() / abs(a))
    return vec


def effective_projectors(setting: WaveplateSetting) -> tuple:
    """The four product projectors of one setting, outcome order hh, hv, vh, vv.

    The analyzer frame is mirror-handed with respect to the operator
    definitions: the projector states are the forward images
    early/late_photon_operator(-theta_a, -phi, -theta_b) |x>, normalized with
    global phases dropped.  This sign convention is what makes the nine
    settings project onto the h/v, p/m, r/l and elliptical catalog states;
    it is pinned by the catalog tests and the rank guard in
    :func:`projection_catalog`.
    """
    m1 = early_photon_operator(-setting.theta_a, -setting.phi, -setting.theta_b)
    m4 = late_photon_operator(-setting.theta_a, -setting.phi, -setting.theta_b)
    out = []
    for xo, yo in product("hv", "hv"):
        p1 = _canonical(m1 @ _BASIS_KET[xo])
        p4 = _canonical(m4 @ _BASIS_KET[yo])
        out.append(
            EffectiveProjector(
                setting_id=setting.id,
                outcome=(xo, yo),
                photon1=Ket(p1),
                photon4=Ket(p4),
                product=Ket(np.kron(p1, p4)),
            )
        )
    return tuple(out)


def _pauli_basis() -> np.ndarray:
    """16 Hermitian operators (sigma_i kron sigma_j)/2 spanning 4x4 Hermitians."""
    singles = (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z)
    return np.array([np.kron(a, b) / 2.0 for a in singles for b in singles])


_PAULI_BASIS = _pauli_basis()


@lru_cache(maxsize=1)
def _projector_table():
    """All 36 projector vectors, keyed lists, and the catalog row indices."""
    keys = []
    vecs = []
    setting_of = []
    for setting in tomography_settings():
        for proj in effective_projectors(setting):
            keys.append((setting.id, proj.outcome[0] + proj.outcome[1]))
            vecs.append(proj.product.amps)
            setting_of.append(setting.id)
    catalog_idx = tuple(keys.index(sel) for sel in _CATALOG_SELECTION)
    return tuple(keys), np.array(vecs), np.array(setting_of), catalog_idx


@lru_cache(maxsize=1)
def projection_catalog() -> tuple:
    """The 16 tomographically independent projections drawn from the settings.

    Raises RuntimeError if the induced sensing matrix is rank deficient,
    which would indicate a broken analyzer convention.
    """
    by_key = {}
    for setting in tomography_settings():
        for proj in effective_projectors(setting):
            by_key[(setting.id, proj.outcome[0] + proj.outcome[1])] = proj
    catalog = tuple(by_key[sel] for sel in _CATALOG_SELECTION)
    sensing = sensing_matrix(catalog)
    rank = np.linalg.matrix_rank(sensing, tol=1e-9)
    if rank < 16:
        raise RuntimeError(f"sensing matrix rank {rank} < 16: analyzer convention is broken")
    logger.debug("sensing matrix condition number %.6f", np.linalg.cond(sensing))
    return catalog


def sensing_matrix(projectors) -> np.ndarray:
    """Real matrix mapping Pauli-basis state components to Born probabilities."""
    rows = []
    for proj in projectors:
        v = proj.product.amps
        rows.append([np.real(np.vdot(v, g @ v)) for g in _PAULI_BASIS])
    return np.array(rows)


def predicted_probabilities(rho: DensityMatrix, projectors=None) -> np.ndarray:
    """Born probabilities of ``rho`` for each projector (default: the catalog)."""
    if projectors is None:
        projectors = projection_catalog()
    if rho.n_photons != 2:
        raise ValueError("tomography operates on 2-photon states")
    vecs = np.array([p.product.amps for p in projectors])
    probs = np.real(np.einsum("ij,jk,ik->i", vecs.conj(), rho.mat, vecs))
    if probs.min() < -1e-10 or probs.max() > 1 + 1e-10:
        raise ValueError("Born probabilities outside [0, 1]; state is not physical")
    return np.clip(probs, 0.0, 1.0)


def setting_probabilities(rho: DensityMatrix, setting: WaveplateSetting) -> dict:
    """Outcome -> probability for one setting; the four values sum to one."""
    projs = effective_projectors(setting)
    probs = predicted_probabilities(rho, projs)
    total = probs.sum()
    if not np.isclose(total, 1.0, atol=1e-9):
        raise ValueError(f"setting {setting.id} outcome probabilities sum to {total}")
    probs = probs / total
    return {p.outcome[0] + p.outcome[1]: float(q) for p, q in zip(projs, probs)}


@dataclass
class CountTable:
    """Coincidence counts per (setting, detector outcome).

    counts maps (setting_id, outcome) with outcome one of "hh", "hv", "vh",
    "vv".  flux is the fourfold coincidence rate in events per second,
    integration_time the accumulation time per setting in seconds.
    conditioning records which joint middle-photon outcome the table is
    post-selected on ("phiplus" or "phiminus"), when applicable.
    """

    counts: dict
    flux: float
    integration_time: float
    seed: int | None = None
    conditioning: str | None = None

    def validate(self):
        expected = {(i, o) for i, *_ in _SETTINGS_DEG for o in OUTCOMES}
        missing = expected - set(self.counts)
        if missing:
            raise ValueError(f"count table missing cells: {sorted(missing)}")
        extra = set(self.counts) - expected
        if extra:
            raise ValueError(f"count table has unknown cells: {sorted(extra)}")
        for key, n in self.counts.items():
            if int(n) != n or n < 0:
                raise ValueError(f"count for {key} must be a nonnegative integer, got {n!r}")
        if self.flux <= 0 or self.integration_time <= 0:
            raise ValueError("flux and integration_time must be positive")

    def setting_total(self, setting_id: int) -> int:
        return sum(self.counts[(setting_id, o)] for o in OUTCOMES)

    def scaled(self, factor: float) -> "CountTable":
        """New table with every count scaled and rounded (for scaling studies)."""
        counts = {k: int(round(v * factor)) for k, v in self.counts.items()}
        return replace(self, counts=counts, flux=self.flux * factor)


def sample_counts(
    rho: DensityMatrix,
    flux: float = 12.0,
    integration_time: float = 360.0,
    seed: int = 0,
    conditioning: str | None = None,
) -> CountTable:
    """Draw Poissonian coincidence counts for all nine settings.

    Each setting's four outcomes get independent Poisson counts with mean
    flux * integration_time * p(outcome); identical seeds give identical
    tables.
    """
    if flux <= 0 or integration_time <= 0:
        raise ValueError("flux and integration_time must be positive")
    rng = np.random.default_rng(seed)
    counts = {}
    for setting in tomography_settings():
        probs = setting_probabilities(rho, setting)
        for outcome in OUTCOMES:
            mean = flux * integration_time * probs[outcome]
            counts[(setting.id, outcome)] = int(rng.poisson(mean))
    return CountTable(
        counts=counts,
        flux=flux,
        integration_time=integration_time,
        seed=seed,
        conditioning=conditioning,
    )


def _normalized_frequencies(counts: CountTable, keys) -> np.ndarray:
    freqs = []
    for sid, outcome in keys:
        total = counts.setting_total(sid)
        if total <= 0:
            raise ValueError(f"setting {sid} has zero total counts")
        freqs.append(counts.counts[(sid, outcome)] / total)
    return np.array(freqs)


def linear_inversion(counts: CountTable) -> DensityMatrix:
    """Direct inversion of the 16 catalog frequencies.

    Exact on noiseless probabilities; on noisy data the result is Hermitian
    and trace-one but may be indefinite (check ``is_physical``).
    """
    counts.validate()
    catalog = projection_catalog()
    keys = [(p.setting_id, p.outcome[0] + p.outcome[1]) for p in catalog]
    freqs = _normalized_frequencies(counts, keys)
    sensing = sensing_matrix(catalog)
    components = np.linalg.solve(sensing, freqs)
    rho = np.tensordot(components, _PAULI_BASIS, axes=(0, 0))
    return DensityMatrix(rho)


def log_likelihood(rho: DensityMatrix, counts: CountTable) -> float:
    """Poissonian log-likelihood of the full 36-cell table, up to log(n!) terms."""
    keys, vecs, setting_of, _ = _projector_table()
    probs = np.real(np.einsum("ij,jk,ik->i", vecs.conj(), rho.mat, vecs))
    n = np.array([counts.counts[k] for k in keys], dtype=float)
    totals = np.array([counts.setting_total(s) for s in setting_of], dtype=float)
    mu = totals * np.clip(probs, 1e-15, None)
    return float(np.sum(n * np.log(mu) - mu))


@dataclass(frozen=True)
class ReconstructionResult:
    """A density-matrix estimate plus reconstruction metadata.

    fidelity_to_target, bootstrap_sigma and n_resamples are filled in by the
    analysis layer once a target state and error estimate are chosen.
    """

    rho: DensityMatrix
    method: str
    converged: bool = True
    n_iterations: int = 0
    log_likelihood: float = float("nan")
    ll_trajectory: tuple = ()
    fidelity_to_target: float | None = None
    bootstrap_sigma: float | None = None
    n_resamples: int = 0


# free complex entries of the upper-triangular factor T in rho = T^dag T
_TRIANGLE_INDICES = ((0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3))


def _params_to_t(t: np.ndarray) -> np.ndarray:
    T = np.zeros((4, 4), dtype=complex)
    T[np.diag_indices(4)] = t[:4]
    for i, (r, c) in enumerate(_TRIANGLE_INDICES):
        T[r, c] = t[4 + 2 * i] + 1j * t[5 + 2 * i]
    return T


def _t_to_params(T: np.ndarray) -> np.ndarray:
    t = np.zeros(16)
    t[:4] = np.real(np.diag(T))
    for i, (r, c) in enumerate(_TRIANGLE_INDICES):
        t[4 + 2 * i] = T[r, c].real
        t[5 + 2 * i] = T[r, c].imag
    return t


def _physical_init(counts: CountTable, init: DensityMatrix | None) -> np.ndarray:
    if init is None:
        try:
            init = linear_inversion(counts)
        except ValueError:
            init = DensityMatrix.maximally_mixed(2)
    w, u = np.linalg.eigh(init.mat)
    w = np.clip(w, 1e-6, None)
    w = w / w.sum()
    mat = (u * w) @ u.conj().T
    # cholesky returns lower L with mat = L L^dag; T = L^dag is the upper factor
    return np.linalg.cholesky(mat).conj().T


def max_likelihood(
    counts: CountTable,
    init: DensityMatrix | None = None,
    tolerance: float = 1e-10,
    max_iters: int = 10000,
) -> ReconstructionResult:
    """Physically constrained maximum-likelihood reconstruction.

    The state is parametrized as rho = T^dag T / tr(T^dag T) with a triangular
    factor T (16 real parameters), and the Poissonian log-likelihood of
    the full count table is maximized by L-BFGS-B with an analytic gradient.
    Convergence is declared when the relative log-likelihood improvement
    drops below ``tolerance``; hitting ``max_iters`` first is reported via
    ``converged=False`` with the partial result returned.

    Parameters
    ----------
    counts : CountTable
        Validated coincidence counts for all nine settings.
    init : DensityMatrix, optional
        Starting state; defaults to eigenvalue-clipped linear inversion.
    tolerance : float
        Relative log-likelihood change declaring convergence.
    max_iters : int
        Iteration cap for the optimizer.
    """
    counts.validate()
    keys, vecs, setting_of, _ = _projector_table()
    n = np.array([counts.counts[k] for k in keys], dtype=float)
    totals = np.array([counts.setting_total(s) for s in setting_of], dtype=float)
    log_totals_term = float(np.sum(n * np.log(np.clip(totals, 1.0, None))))
    # rank-1 projectors stacked for fast Born evaluation
    V = vecs  # (36, 4)

    def objective(t):
        T = _params_to_t(t)
        rho_un = T.conj().T @ T
        tau = np.real(np.trace(rho_un))
        rho = rho_un / tau
        probs = np.real(np.einsum("ij,jk,ik->i", V.conj(), rho, V))
        probs_f = np.clip(probs, 1e-15, None)
        ll = float(np.sum(n * np.log(probs_f)) + log_totals_term - np.sum(totals * probs))
        # dL/drho = sum_i (n_i / p_i - N_i) P_i
        coeff = n / probs_f - totals
        D = (V.conj().T * coeff) @ V
        D = (D + D.conj().T) / 2
        C = (D - np.real(np.trace(D @ rho)) * np.eye(4)) / tau
        G = 2.0 * (T @ C)
        grad = np.zeros(16)
        grad[:4] = np.real(np.diag(G))
        for i, (r, c) in enumerate(_TRIANGLE_INDICES):
            grad[4 + 2 * i] = G[r, c].real
            grad[5 + 2 * i] = G[r, c].imag
        return -ll, -grad

    t0 = _t_to_params(_physical_init(counts, init))
    trajectory = []

    def track(tk):
        trajectory.append(-objective(tk)[0])

    res = minimize(
        objective,
        t0,
        jac=True,
        method="L-BFGS-B",
        callback=track,
        options={"maxiter": max_iters, "maxfun": 20 * max_iters, "ftol": tolerance, "gtol": 1e-12},
    )
    T = _params_to_t(res.x)
    rho_un = T.conj().T @ T
    rho = DensityMatrix(rho_un / np.real(np.trace(rho_un)))
    # status 1 is the iteration cap; a stalled line search (status 2) means the
    # likelihood cannot improve at working precision, which satisfies the
    # improvement-below-tolerance contract
    converged = bool(res.status != 1)
    return ReconstructionResult(
        rho=rho,
        method="ml",
        converged=converged,
        n_iterations=int(res.nit),
        log_likelihood=float(-res.fun),
        ll_trajectory=tuple(trajectory),
    )


def reconstruct(counts: CountTable, method: str = "ml", **kwargs) -> ReconstructionResult:
    """Reconstruct by the named method: "li" or "ml"."""
    if method == "li":
        rho = linear_inversion(counts)
        return ReconstructionResult(
            rho=rho,
            method="li",
            converged=True,
            n_iterations=0,
            log_likelihood=log_likelihood(rho.clipped_to_physical(), counts),
        )
    if method == "ml":
        return max_likelihood(counts, **kwargs)
    raise ValueError(f"unknown reconstruction method {method!r}")


def bootstrap_error(
    counts: CountTable,
    target: Ket,
    n_resamples: int = 100,
    seed: int = 0,
    method: str = "ml",
) -> float:
    """Bootstrap standard error of the fidelity to a pure target state.

    Every cell of the table is resampled Poisson(mean = observed count),
    each resample is reconstructed with ``method``, and the standard
    deviation of the resulting fidelities is returned.  Each resample draws
    from its own stream spawned off the master seed, so results do not
    depend on evaluation order.
    """
    if n_resamples < 2:
        raise ValueError("need at least 2 resamples")
    counts.validate()
    children = np.random.SeedSequence(seed).spawn(n_resamples)
    base = np.array([counts.counts[k] for k in sorted(counts.counts)])
    keys = sorted(counts.counts)
    fids = np.empty(n_resamples)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        resampled = dict(zip(keys, (int(x) for x in rng.poisson(base))))
        table = replace(counts, counts=resampled)
        result = reconstruct(table, method=method)
        fids[i] = fidelity(result.rho, target)
    return float(np.std(fids, ddof=1))
