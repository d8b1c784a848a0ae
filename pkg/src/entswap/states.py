"""Exact complex linear algebra for few-photon polarization states.

Polarization kets live in (C^2)^n with basis states labeled by strings over
{h, v}.  Photon 0 occupies the most significant position of the amplitude
index, i.e. the basis state |q0 q1 ... q(n-1)> sits at index
sum(q_k << (n-1-k)) with h = 0 and v = 1.

Single-photon basis conventions:

    |p>, |m> = (|h> +/- |v>) / sqrt(2)
    |r>      = (|h> + i|v>) / sqrt(2)
    |l>      = (i|h> + |v>) / sqrt(2)

Note |l> equals the more common (|h> - i|v>)/sqrt(2) up to a global phase i;
state comparisons in this package are phase-free, but the representative
above is what :func:`ket` returns.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-10
PSD_EIGEN_TOL = -1e-8

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_SINGLE = {
    "h": np.array([1, 0], dtype=complex),
    "v": np.array([0, 1], dtype=complex),
    "p": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "m": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "r": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "l": np.array([1j, 1], dtype=complex) / np.sqrt(2),
}


class BellKind(Enum):
    """The four maximally entangled two-photon states."""

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class Ket:
    """Pure n-photon polarization state as a complex amplitude vector."""

    __slots__ = ("amps",)

    def __init__(self, amps, normalize: bool = False):
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if amps.size < 2 or amps.size & (amps.size - 1):
            raise ValueError(f"amplitude vector length {amps.size} is not a power of two >= 2")
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        if normalize:
            n = np.linalg.norm(amps)
            if n == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / n
        self.amps = amps

    @property
    def n_photons(self) -> int:
        return self.amps.size.bit_length() - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def inner(self, other: "Ket") -> complex:
        """<self|other> with the usual conjugate-linear first slot."""
        if other.n_photons != self.n_photons:
            raise ValueError("photon number mismatch")
        return complex(np.vdot(self.amps, other.amps))

    def overlap(self, other: "Ket") -> float:
        """|<self|other>|, the phase-free overlap used for state comparison."""
        return abs(self.inner(other))

    def to_density(self) -> "DensityMatrix":
        a = self.amps / np.linalg.norm(self.amps)
        return DensityMatrix(np.outer(a, a.conj()))

    def __repr__(self):
        return f"Ket(n_photons={self.n_photons}, amps={np.round(self.amps, 6)!r})"


class DensityMatrix:
    """Hermitian trace-one operator over n photon polarization modes.

    Positivity is not enforced at construction: linear tomographic inversion
    legitimately produces indefinite matrices.  Use :meth:`is_physical` or
    :meth:`min_eigenvalue` to check.
    """

    __slots__ = ("mat",)

    def __init__(self, mat):
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        dim = mat.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"dimension {dim} is not a power of two >= 2")
        if not np.all(np.isfinite(mat.view(float))):
            raise ValueError("entries must be finite")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_ATOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        tr = np.trace(mat)
        if abs(tr - 1.0) > HERMITIAN_ATOL:
            raise ValueError(f"trace is {tr}, expected 1")
        self.mat = (mat + mat.conj().T) / 2.0

    @classmethod
    def from_ket(cls, ket: Ket) -> "DensityMatrix":
        return ket.to_density()

    @classmethod
    def maximally_mixed(cls, n_photons: int) -> "DensityMatrix":
        dim = 2 ** n_photons
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def mixture(cls, pairs) -> "DensityMatrix":
        """Convex mixture from (weight, DensityMatrix) pairs."""
        mat = sum(w * dm.mat for w, dm in pairs)
        return cls(mat)

    @property
    def n_photons(self) -> int:
        return self.mat.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def is_physical(self, tol: float = PSD_EIGEN_TOL) -> bool:
        return self.min_eigenvalue() >= tol

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    def clipped_to_physical(self) -> "DensityMatrix":
        """Nearest-by-eigenvalue-clipping physical state (for indefinite input)."""
        w, u = np.linalg.eigh(self.mat)
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        return DensityMatrix((u * w) @ u.conj().T)

    def __repr__(self):
        return f"DensityMatrix(n_photons={self.n_photons})"


def ket(label: str) -> Ket:
    """Build a product polarization ket from a letter string, e.g. ``ket("hv")``.

    Letters are drawn from h, v, p, m, r, l with the conventions in the
    module docstring.
    """
    if not label:
        raise ValueError("empty polarization label")
    vecs = []
    for ch in label:
        if ch not in _SINGLE:
            raise ValueError(f"unknown polarization letter {ch!r}")
        vecs.append(_SINGLE[ch])
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(out, v)
    return Ket(out)


def bell_state(kind: BellKind) -> Ket:
    """The normalized two-photon Bell ket with real +/-1/sqrt(2) coefficients."""
    amps = np.zeros(4, dtype=complex)
    s = 1 / np.sqrt(2)
    if kind is BellKind.PHI_PLUS:
        amps[0b00], amps[0b11] = s, s
    elif kind is BellKind.PHI_MINUS:
        amps[0b00], amps[0b11] = s, -s
    elif kind is BellKind.PSI_PLUS:
        amps[0b01], amps[0b10] = s, s
    elif kind is BellKind.PSI_MINUS:
        amps[0b01], amps[0b10] = s, -s
    else:
        raise ValueError(f"unknown Bell kind {kind!r}")
    return Ket(amps)


def tensor(*states: Ket) -> Ket:
    """Kronecker product of kets in photon-index order."""
    if len(states) == 1 and isinstance(states[0], (list, tuple)):
        states = tuple(states[0])
    if not states:
        raise ValueError("tensor of no states")
    out = states[0].amps
    for s in states[1:]:
        out = np.kron(out, s.amps)
    return Ket(out)


def hwp(theta: float) -> np.ndarray:
    """Half-wave-plate Jones matrix [[cos 2t, sin 2t], [sin 2t, -cos 2t]].

    theta is the plate angle in radians; the matrix is real, unitary and
    self-inverse.  theta = pi/8 maps h/v to p/m, theta = pi/4 gives sigma_x.
    """
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def phase_plate(phi: float) -> np.ndarray:
    """Relative phase between the h and v components: diag(1, e^{i phi})."""
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


def apply_single(op: np.ndarray, photon_index: int, state: Ket) -> Ket:
    """Apply a 2x2 Jones operator to one photon of a multi-photon ket."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {op.shape}")
    n = state.n_photons
    if not 0 <= photon_index < n:
        raise IndexError(f"photon index {photon_index} out of range for {n} photons")
    t = state.amps.reshape((2,) * n)
    t = np.tensordot(op, t, axes=([1], [photon_index]))
    t = np.moveaxis(t, 0, photon_index)
    return Ket(t.reshape(-1))


def born_probability(projector: Ket, state) -> float:
    """Born-rule probability of projecting ``state`` onto ``projector``.

    ``state`` may be a Ket (returns |<proj|psi>|^2) or a DensityMatrix
    (returns <proj|rho|proj>).  The projector must be normalized.
    """
    if abs(projector.norm - 1.0) > 1e-9:
        raise ValueError("projector is not normalized")
    if isinstance(state, Ket):
        if state.n_photons != projector.n_photons:
            raise ValueError("photon number mismatch")
        p = abs(np.vdot(projector.amps, state.amps)) ** 2
    elif isinstance(state, DensityMatrix):
        if state.n_photons != projector.n_photons:
            raise ValueError("photon number mismatch")
        p = np.real(np.vdot(projector.amps, state.mat @ projector.amps))
    else:
        raise TypeError(f"state must be Ket or DensityMatrix, got {type(state)!r}")
    if p < -1e-10 or p > 1 + 1e-10:
        raise ValueError(f"Born probability {p} outside [0, 1]")
    return float(min(max(p, 0.0), 1.0))


def fidelity(rho, target: Ket) -> float:
    """Fidelity <target|rho|target> against a pure target state."""
    if isinstance(rho, Ket):
        rho = rho.to_density()
    if rho.n_photons != target.n_photons:
        raise ValueError("photon number mismatch")
    t = target.amps / np.linalg.norm(target.amps)
    return float(np.real(np.vdot(t, rho.mat @ t)))


def state_fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 between two states."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    wa, ua = np.linalg.eigh(a.mat)
    sq = (ua * np.sqrt(np.clip(wa, 0.0, None))) @ ua.conj().T
    inner = sq @ b.mat @ sq
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-photon state, clamped to [0, 1]."""
    if rho.n_photons != 2:
        raise ValueError("concurrence is defined here for 2-photon states only")
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    rho_tilde = rho.mat @ yy @ rho.mat.conj() @ yy
    # abs() guards tiny negative numerics before the square root
    lam = np.sqrt(np.abs(np.sort(np.real(np.linalg.eigvals(rho_tilde)))[::-1]))
    return float(min(max(lam[0] - lam[1] - lam[2] - lam[3], 0.0), 1.0))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state over the photon indices in ``keep`` (order preserved)."""
    keep = sorted(set(int(k) for k in keep))
    n = rho.n_photons
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} photons")
    traced = [i for i in range(n) if i not in keep]
    if not traced:
        return DensityMatrix(rho.mat.copy())
    t = rho.mat.reshape((2,) * (2 * n))
    for count, i in enumerate(traced):
        # axis pair for photon i in the current (shrinking) tensor
        off = sum(1 for j in traced[:count] if j < i)
        ax = i - off
        ndim_half = t.ndim // 2
        t = np.trace(t, axis1=ax, axis2=ndim_half + ax)
    dim = 2 ** len(keep)
    return DensityMatrix(t.reshape(dim, dim))
