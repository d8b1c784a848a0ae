"""Two-pair swap protocol: time-labeled four-photon state, delay relabeling,
Bell-basis decomposition, and the post-selected projection of the middle
photons with a tunable distinguishability model.

Photon indices and labels
-------------------------
Photons are numbered 0..3 in ket order.  The two source pairs are photons
(0, 1) and (2, 3); the spatial modes alternate a, b, a, b.  Before the delay
the time slots are (0, 0, 1, 1); the delay line shifts both mode-b photons
one slot later, giving (0, 1, 1, 2).  After the delay, photons 1 and 2 share
time slot 1 and are the ones projected jointly ("middle" photons); photons
0 and 3 never coexist and form the swapped pair.

The Bell decomposition is taken in the basis {Bell(photons 0,3) x
Bell(photons 1,2)}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .states import BellKind, DensityMatrix, Ket, bell_state, ket

BELL_ORDER = (BellKind.PHI_PLUS, BellKind.PHI_MINUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS)


@dataclass(frozen=True)
class ModeLabel:
    """Spatial mode ('a' or 'b') and integer time slot of one photon."""

    spatial: str
    time_slot: int

    def __post_init__(self):
        if self.spatial not in ("a", "b"):
            raise ValueError(f"spatial mode must be 'a' or 'b', got {self.spatial!r}")
        if not 0 <= self.time_slot <= 2:
            raise ValueError(f"time slot must be 0, 1 or 2, got {self.time_slot}")


PRE_DELAY_LABELS = (
    ModeLabel("a", 0),
    ModeLabel("b", 0),
    ModeLabel("a", 1),
    ModeLabel("b", 1),
)
POST_DELAY_LABELS = (
    ModeLabel("a", 0),
    ModeLabel("b", 1),
    ModeLabel("a", 1),
    ModeLabel("b", 2),
)


@dataclass(frozen=True)
class LabeledFourPhotonState:
    """Four-photon ket together with per-photon (spatial, time) labels."""

    ket: Ket
    labels: tuple = PRE_DELAY_LABELS

    def __post_init__(self):
        if self.ket.n_photons != 4:
            raise ValueError("state must have exactly 4 photons")
        if len(self.labels) != 4 or len(set(self.labels)) != 4:
            raise ValueError("need 4 distinct (spatial, time) labels")

    @property
    def delayed(self) -> bool:
        return self.labels == POST_DELAY_LABELS


@dataclass(frozen=True)
class DistinguishabilityModel:
    """Imperfections of the joint projection of the middle photons.

    overlap:      mode overlap v of the two middle photons at the projecting
                  beam splitter; v=1 is a coherent Bell projection, v=0 an
                  incoherent correlated-polarization filter.
    white_noise:  weight p of a maximally mixed admixture applied to the
                  conditional swapped-pair state, standing in for
                  multi-pair emission background.
    """

    overlap: float = 1.0
    white_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"overlap must be in [0, 1], got {self.overlap}")
        if not 0.0 <= self.white_noise <= 1.0:
            raise ValueError(f"white_noise must be in [0, 1], got {self.white_noise}")


@dataclass(frozen=True)
class BellProjectionResult:
    outcome: BellKind
    probability: float
    conditional_state: DensityMatrix


@dataclass(frozen=True)
class BellDecomposition:
    """Coefficients of a four-photon ket over Bell(0,3) x Bell(1,2).

    ``coefficients[i, j]`` multiplies the product of BELL_ORDER[i] on the
    outer photon pair and BELL_ORDER[j] on the middle pair.
    """

    coefficients: np.ndarray = field(repr=False)

    def matched(self) -> dict:
        """The four same-kind coefficients, keyed by BellKind."""
        return {k: complex(self.coefficients[i, i]) for i, k in enumerate(BELL_ORDER)}

    def max_cross_term(self) -> float:
        off = self.coefficients[~np.eye(4, dtype=bool)]
        return float(np.max(np.abs(off)))

    def total_weight(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def _pair_ket(phase: float) -> Ket:
    """Two-photon source state (|hv> + e^{i phase} |vh>)/sqrt(2)."""
    amps = np.zeros(4, dtype=complex)
    amps[0b01] = 1 / np.sqrt(2)
    amps[0b10] = np.exp(1j * phase) / np.sqrt(2)
    return Ket(amps)


def build_two_pair_state(phase_1: float = math.pi, phase_2: float = math.pi) -> LabeledFourPhotonState:
    """Tensor the two source pairs with pre-delay labels.

    Each pair is (|hv> + e^{i phase}|vh>)/sqrt(2); the default phase pi
    yields the singlet on both pairs.
    """
    amps = np.kron(_pair_ket(phase_1).amps, _pair_ket(phase_2).amps)
    return LabeledFourPhotonState(Ket(amps), PRE_DELAY_LABELS)


def apply_delay(state: LabeledFourPhotonState) -> LabeledFourPhotonState:
    """Shift both mode-b photons one time slot later; amplitudes unchanged."""
    if state.labels != PRE_DELAY_LABELS:
        raise ValueError("delay already applied or labels not in pre-delay configuration")
    return LabeledFourPhotonState(state.ket, POST_DELAY_LABELS)


def _bell_product_basis() -> np.ndarray:
    """16 x 16 matrix whose rows are Bell(0,3) x Bell(1,2) basis vectors."""
    rows = []
    for kx in BELL_ORDER:
        x = bell_state(kx).amps.reshape(2, 2)
        for ky in BELL_ORDER:
            y = bell_state(ky).amps.reshape(2, 2)
            # photon order (q0 q1 q2 q3): outer state carries (q0, q3),
            # middle state carries (q1, q2)
            rows.append(np.einsum("ad,bc->abcd", x, y).reshape(-1))
    return np.array(rows)


_BELL_BASIS = _bell_product_basis()


def bell_basis_coefficients(state: Ket) -> np.ndarray:
    """All 16 coefficients of a four-photon ket in the paired Bell basis."""
    if state.n_photons != 4:
        raise ValueError("need a 4-photon state")
    return (_BELL_BASIS.conj() @ state.amps).reshape(4, 4)


def bell_decompose(state: LabeledFourPhotonState) -> BellDecomposition:
    """Decompose a post-delay state over Bell(0,3) x Bell(1,2)."""
    if not state.delayed:
        raise ValueError("decomposition expects post-delay labels")
    return BellDecomposition(bell_basis_coefficients(state.ket))


def _middle_povm_element(outcome: BellKind, overlap: float) -> np.ndarray:
    b = bell_state(outcome).amps
    coherent = np.outer(b, b.conj())
    hh = ket("hh").amps
    vv = ket("vv").amps
    incoherent = 0.5 * (np.outer(hh, hh.conj()) + np.outer(vv, vv.conj()))
    return overlap * coherent + (1.0 - overlap) * incoherent


def project_middle(
    state: LabeledFourPhotonState,
    outcome: BellKind,
    model: DistinguishabilityModel = DistinguishabilityModel(),
) -> BellProjectionResult:
    """Post-selected joint measurement of the two time-slot-1 photons.

    For outcome phi+/- the middle photons are measured with the mixed
    element v |phi+/-><phi+/-| + (1-v)/2 (|hh><hh| + |vv><vv|); the returned
    conditional state is the normalized reduced state of photons (0, 3),
    optionally mixed with I/4 at the model's white-noise weight.
    """
    if outcome not in (BellKind.PHI_PLUS, BellKind.PHI_MINUS):
        raise ValueError("post-selected projection distinguishes only phi+ and phi-")
    if not state.delayed:
        raise ValueError("projection expects post-delay labels (middle photons at slot 1)")

    W = _middle_povm_element(outcome, model.overlap)
    full = np.kron(np.kron(np.eye(2), W), np.eye(2))
    rho4 = np.outer(state.ket.amps, state.ket.amps.conj())
    weighted = full @ rho4
    probability = float(np.real(np.trace(weighted)))

    t = weighted.reshape((2,) * 8)
    reduced = np.einsum("abcdebch->adeh", t).reshape(4, 4)
    reduced = (reduced + reduced.conj().T) / 2
    if probability <= 0:
        raise ValueError("projection outcome has zero probability for this state")
    conditional = DensityMatrix(reduced / probability)
    if model.white_noise > 0:
        conditional = DensityMatrix.mixture(
            [
                (1.0 - model.white_noise, conditional),
                (model.white_noise, DensityMatrix.maximally_mixed(2)),
            ]
        )
    return BellProjectionResult(outcome, probability, conditional)
