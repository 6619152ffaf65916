"""Truncated Fock-space states, density matrices and scalar diagnostics.

Everything downstream (feedback evolution, Wigner transforms, stroboscopic
maps) works on the types defined here.  All types are immutable after
construction and every constructor validates its invariants, so a state that
exists is a state that is safe to use.
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateCatError, DimMismatchError, TruncationError

_NORM_TOL = 1e-12
_HERM_TOL = 1e-12
_TRACE_TOL = 1e-10
_EIG_FLOOR = -1e-10
_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class FockDim:
    """Photon-number cutoff: basis {|0>, ..., |n_max>}, dimension n_max + 1."""

    n_max: int

    def __post_init__(self):
        if not isinstance(self.n_max, (int, np.integer)) or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def size(self) -> int:
        return self.n_max + 1


class CatParity(enum.Enum):
    """Photon-number parity of a cat state."""

    EVEN = +1
    ODD = -1

    @property
    def sign(self) -> int:
        return self.value


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Pure state of one cavity mode over the truncated basis."""

    amplitudes: np.ndarray
    dim: FockDim

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.dim.size,):
            raise ValueError(f"expected {self.dim.size} amplitudes, got shape {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {_NORM_TOL}")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    def mean_photon_number(self) -> float:
        n = np.arange(self.dim.size)
        return float(np.sum(n * np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive (to round-off) mode state."""

    elements: np.ndarray
    dim: FockDim

    def __post_init__(self):
        mat = np.asarray(self.elements, dtype=complex)
        n = self.dim.size
        if mat.shape != (n, n):
            raise ValueError(f"expected {n}x{n} matrix, got shape {mat.shape}")
        herm_dev = float(np.max(np.abs(mat - mat.conj().T)))
        if herm_dev > _HERM_TOL:
            raise ValueError(f"matrix is not Hermitian: max deviation {herm_dev:.3e}")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > _TRACE_TOL:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond {_TRACE_TOL}")
        lo = float(np.min(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)))
        if lo < _EIG_FLOOR:
            raise ValueError(f"smallest eigenvalue {lo:.3e} below positivity floor {_EIG_FLOOR}")
        object.__setattr__(self, "elements", _freeze(mat))

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        amps = state.amplitudes
        return cls(np.outer(amps, amps.conj()), state.dim)

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.elements)).copy()

    def mean_photon_number(self) -> float:
        n = np.arange(self.dim.size)
        return float(np.sum(n * self.populations()))

    def digest(self) -> str:
        """Deterministic short fingerprint of the matrix contents."""
        return hashlib.sha256(self.elements.tobytes()).hexdigest()[:16]


def coherent_state(alpha: complex, dim: FockDim) -> StateVector:
    """Coherent state |alpha>, renormalised over the truncated basis.

    Raises TruncationError when the untruncated Poisson weight beyond n_max
    exceeds 1e-10; requires |alpha|^2 <= n_max / 4 so the basis comfortably
    covers the photon-number distribution.
    """
    alpha = complex(alpha)
    a2 = abs(alpha) ** 2
    if a2 > dim.n_max / 4.0:
        raise ValueError(
            f"|alpha|^2 = {a2:.4g} exceeds n_max/4 = {dim.n_max / 4.0:.4g}; enlarge the basis"
        )
    n = np.arange(dim.size)
    if alpha == 0:
        amps = np.zeros(dim.size, dtype=complex)
        amps[0] = 1.0
        return StateVector(amps, dim)
    # log-space Poisson weights avoid factorial overflow
    log_w = n * np.log(a2) - gammaln(n + 1) - a2
    weights = np.exp(log_w)
    tail = 1.0 - float(np.sum(weights))
    if tail > _TAIL_TOL:
        raise TruncationError(
            f"coherent-state tail mass {tail:.3e} beyond n_max={dim.n_max} exceeds {_TAIL_TOL}"
        )
    phase = np.exp(1j * n * np.angle(alpha))
    amps = np.sqrt(weights) * phase
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return StateVector(amps, dim)


def cat_state(alpha: complex, parity: CatParity, dim: FockDim) -> StateVector:
    """Even or odd superposition of |alpha> and |-alpha>.

    The odd cat has exactly zero amplitude on every even photon number, the
    even cat on every odd one; destructive interference is enforced exactly
    rather than left to floating-point cancellation.
    """
    alpha = complex(alpha)
    if parity is CatParity.ODD and abs(alpha) < 1e-8:
        raise DegenerateCatError("odd cat state is undefined for alpha ~ 0")
    base = coherent_state(alpha, dim)
    amps = np.array(base.amplitudes)
    n = np.arange(dim.size)
    if parity is CatParity.EVEN:
        amps[n % 2 == 1] = 0.0
    else:
        amps[n % 2 == 0] = 0.0
    a2 = abs(alpha) ** 2
    # normalisation 2 (1 +/- exp(-2|alpha|^2)) of the untruncated superposition
    npm = 1.0 / np.sqrt(2.0 * (1.0 + parity.sign * np.exp(-2.0 * a2)))
    amps = 2.0 * npm * amps
    norm = float(np.sum(np.abs(amps) ** 2))
    amps /= np.sqrt(norm)
    return StateVector(amps, dim)


def fock_superposition(terms, dim: FockDim) -> StateVector:
    """Sparse superposition sum_k coeff_k |n_k> from (n, coeff) pairs."""
    amps = np.zeros(dim.size, dtype=complex)
    total = 0.0
    for n, coeff in terms:
        if n > dim.n_max:
            raise IndexError(f"Fock index {n} exceeds n_max = {dim.n_max}")
        if n < 0:
            raise IndexError(f"Fock index {n} is negative")
        amps[n] += coeff
        total += abs(coeff) ** 2
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"coefficient norm {total!r} deviates from 1 beyond 1e-10")
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return StateVector(amps, dim)


def parity_expectation(rho: DensityMatrix) -> float:
    """Mean photon-number parity sum_n (-1)^n rho_nn, in [-1, 1]."""
    n = np.arange(rho.dim.size)
    return float(np.real(np.sum((-1.0) ** n * np.diag(rho.elements))))


def fidelity(rho0: DensityMatrix, rho_t: DensityMatrix) -> float:
    """Overlap Tr{rho0 rho_t} = sum_nm conj(rho0_nm) rho_t_nm."""
    if rho0.dim != rho_t.dim:
        raise DimMismatchError(f"dims differ: {rho0.dim} vs {rho_t.dim}")
    val = complex(np.vdot(rho0.elements, rho_t.elements))
    return float(val.real)


def mean_amplitude(rho: DensityMatrix) -> complex:
    """Mean field amplitude <a> = sum_n sqrt(n+1) rho_{n+1,n}."""
    n = np.arange(rho.dim.size - 1)
    sub = np.diagonal(rho.elements, offset=-1)
    return complex(np.sum(np.sqrt(n + 1.0) * sub))


def trace_distance(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    """Trace distance (1/2) sum |eigenvalues of rho_a - rho_b|."""
    if rho_a.dim != rho_b.dim:
        raise DimMismatchError(f"dims differ: {rho_a.dim} vs {rho_b.dim}")
    diff = rho_a.elements - rho_b.elements
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
