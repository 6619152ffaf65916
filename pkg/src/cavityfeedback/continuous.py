"""Continuous photodetection-feedback evolution of a cavity mode.

The master equation combines vacuum damping at the reduced rate
(1 - eta) * gamma with an unconventional phase-diffusion double commutator
in sqrt(n).  In the Fock basis the generator couples a matrix element only
to the element one step up the same off-diagonal:

    d rho_{n,m} / dt = (1 - eta) gamma sqrt((n+1)(m+1)) rho_{n+1,m+1}
                       + eta gamma sqrt(n m) rho_{n,m}
                       - (gamma / 2) (n + m) rho_{n,m}

so each off-diagonal band evolves under its own upper-bidiagonal generator.
Every band is propagated by an exact matrix exponential; no time stepper and
no integrator tolerance enters any result.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import TruncationError
from .fock import CatParity, DensityMatrix

_TOP_POPULATION_TOL = 1e-8


@dataclass(frozen=True)
class ContinuousParams:
    """Cavity decay rate gamma (1/time) and detector efficiency eta in [0, 1]."""

    gamma: float
    eta: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class DiagonalBand:
    """Vector of matrix elements rho_{n,n+p} sharing off-diagonal index p."""

    p: int
    values: np.ndarray

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("off-diagonal index p must be >= 0")
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1:
            raise ValueError("band values must be a vector")
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def diagonal_band(rho: DensityMatrix, p: int) -> DiagonalBand:
    """Extract the band rho_{n,n+p}, n = 0 .. N-1-p."""
    if p > rho.dim.n_max:
        raise ValueError(f"band index {p} exceeds n_max = {rho.dim.n_max}")
    return DiagonalBand(p, np.diagonal(rho.elements, offset=p).copy())


def _band_generator(eta: float, p: int, length: int):
    """Per-band generator in units of gamma: diagonal and upper coupling."""
    i = np.arange(length, dtype=float)
    diag = eta * np.sqrt(i * (i + p)) - (2.0 * i + p) / 2.0
    upper = (1.0 - eta) * np.sqrt((i[:-1] + 1.0) * (i[:-1] + p + 1.0))
    return diag, upper


def _band_propagator(eta: float, p: int, length: int, gamma_t: float) -> np.ndarray:
    diag, upper = _band_generator(eta, p, length)
    gen = np.diag(diag)
    if length > 1:
        gen += np.diag(upper, 1)
    return expm(gamma_t * gen)


def _evolve_matrix(mat: np.ndarray, eta: float, gamma_t: float) -> np.ndarray:
    """Propagate an arbitrary (not necessarily Hermitian) matrix band by band."""
    n = mat.shape[0]
    out = np.zeros_like(mat, dtype=complex)
    for p in range(n):
        prop = None
        upper = np.diagonal(mat, offset=p)
        if np.any(upper):
            prop = _band_propagator(eta, p, n - p, gamma_t)
            idx = np.arange(n - p)
            out[idx, idx + p] = prop @ upper
        if p == 0:
            continue
        lower = np.diagonal(mat, offset=-p)
        if np.any(lower):
            if prop is None:
                prop = _band_propagator(eta, p, n - p, gamma_t)
            idx = np.arange(n - p)
            out[idx + p, idx] = prop @ lower
    return out


def _check_top_population(rho: DensityMatrix):
    top = float(np.real(rho.elements[-1, -1]))
    if top > _TOP_POPULATION_TOL:
        raise TruncationError(
            f"population {top:.3e} on the top Fock level; leakage above the cutoff "
            "is not modelled, enlarge the basis"
        )


def evolve_continuous(rho0: DensityMatrix, params: ContinuousParams, t: float) -> DensityMatrix:
    """Evolve rho0 for a time t under detection efficiency eta.

    Trace is conserved exactly on the truncated basis, Hermiticity by
    construction; for eta = 1 the populations are constants of motion.
    """
    if t < 0:
        raise ValueError("t must be >= 0; negative times are not time-reversed")
    _check_top_population(rho0)
    out = _evolve_matrix(np.asarray(rho0.elements), params.eta, params.gamma * t)
    out = (out + out.conj().T) / 2.0
    return DensityMatrix(out, rho0.dim)


def evolve_continuous_grid(rho0: DensityMatrix, params: ContinuousParams, times) -> list:
    """States at each time of a uniform grid starting at 0.

    One propagator per band is exponentiated for the grid spacing and applied
    repeatedly; products of exact exponentials of one generator stay exact.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if times.size > 1:
        steps = np.diff(times)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-12 * steps[0]:
            raise ValueError("time grid must be uniform and increasing")
    _check_top_population(rho0)
    n = rho0.dim.size
    if times.size == 1:
        return [rho0]
    dt = float(times[1] - times[0])
    props = [_band_propagator(params.eta, p, n - p, params.gamma * dt) for p in range(n)]
    bands = [np.diagonal(rho0.elements, offset=p).copy() for p in range(n)]
    out = [rho0]
    for _ in range(times.size - 1):
        mat = np.zeros((n, n), dtype=complex)
        for p in range(n):
            bands[p] = props[p] @ bands[p]
            idx = np.arange(n - p)
            mat[idx, idx + p] = bands[p]
            if p:
                mat[idx + p, idx] = np.conj(bands[p])
        out.append(DensityMatrix(mat, rho0.dim))
    return out


def ideal_offdiagonal_decay(rho0: DensityMatrix, gamma: float, t: float) -> DensityMatrix:
    """Closed-form ideal-detection evolution.

    Each element picks up exp(-(gamma t / 2) (sqrt(n) - sqrt(m))^2); the
    populations are untouched.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    n = np.arange(rho0.dim.size, dtype=float)
    root = np.sqrt(n)
    factor = np.exp(-0.5 * gamma * t * (root[:, None] - root[None, :]) ** 2)
    return DensityMatrix(rho0.elements * factor, rho0.dim)


def standard_phase_diffusion(rho0: DensityMatrix, gamma: float, t: float) -> DensityMatrix:
    """Conventional phase diffusion: exp(-(gamma t / 2) (n - m)^2) per element."""
    if t < 0:
        raise ValueError("t must be >= 0")
    n = np.arange(rho0.dim.size, dtype=float)
    factor = np.exp(-0.5 * gamma * t * (n[:, None] - n[None, :]) ** 2)
    return DensityMatrix(rho0.elements * factor, rho0.dim)


def cat_fidelity_analytic(alpha2: float, parity: CatParity, gamma: float, t: float) -> float:
    """No-feedback fidelity of an even/odd cat with squared amplitude alpha2.

    Closed form for a cat state relaxing in a vacuum bath; the overlap of the
    decayed state with the initial one factorises into an interference weight,
    an amplitude-shrinkage Gaussian and a parity-projection ratio.
    """
    if alpha2 <= 0:
        raise ValueError("alpha2 must be positive")
    if t < 0:
        raise ValueError("t must be >= 0")
    s = parity.sign
    e1 = np.exp(-gamma * t)
    eh = np.exp(-gamma * t / 2.0)
    front = (1.0 + np.exp(-2.0 * alpha2 * (1.0 - e1))) / 2.0
    shrink = np.exp(-alpha2 * (1.0 - eh) ** 2)
    ratio = (1.0 + s * np.exp(-2.0 * alpha2 * eh)) / (1.0 + s * np.exp(-2.0 * alpha2))
    return float(front * shrink * ratio**2)


def fock_fidelity_analytic(
    abs_alpha2: float,
    abs_beta2: float,
    n: int,
    m: int,
    params: ContinuousParams,
    t: float,
) -> float:
    """Fidelity of the superposition a|n> + b|m> (m > n) under feedback.

    Four contributions: the two surviving populations, the coherence between
    the levels, and the population transferred from m down to n by the
    residual damping channel (binomial in the m - n lost quanta).
    """
    if not (m > n >= 0):
        raise ValueError("need m > n >= 0")
    if abs(abs_alpha2 + abs_beta2 - 1.0) > 1e-10:
        raise ValueError("|alpha|^2 + |beta|^2 must equal 1")
    a2, b2 = abs_alpha2, abs_beta2
    gt = params.gamma * t
    eta = params.eta
    damp = (1.0 - eta) * gt
    log_binom = gammaln(m + 1) - gammaln(n + 1) - gammaln(m - n + 1)
    surv = a2**2 * np.exp(-n * damp) + b2**2 * np.exp(-m * damp)
    cross = 2.0 * a2 * b2 * np.exp(-gt * ((m + n) / 2.0 - eta * np.sqrt(n * m)))
    repop = (
        a2
        * b2
        * np.exp(log_binom)
        * np.exp(-n * damp)
        * (1.0 - np.exp(-damp)) ** (m - n)
    )
    return float(surv + cross + repop)


def mean_amplitude_ideal(rho0: DensityMatrix, gamma: float, t: float) -> complex:
    """Exact mean amplitude <a(t)> under ideal-detection feedback.

    Each first-off-diagonal element decays with its own sqrt-spaced rate;
    summing gives the exact counterpart of the semiclassical slow decay
    exp(-gamma t / (8 nbar)).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    n = np.arange(rho0.dim.size - 1, dtype=float)
    sub = np.diagonal(rho0.elements, offset=-1)
    factors = np.exp(-0.5 * gamma * t * (np.sqrt(n + 1.0) - np.sqrt(n)) ** 2)
    return complex(np.sum(np.sqrt(n + 1.0) * factors * sub))
