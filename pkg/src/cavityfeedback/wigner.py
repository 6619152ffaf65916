"""Wigner function of a Fock-basis density matrix and phase-diffusion diagnostics.

The polar-coordinate photon-number series for W(r, theta) involves
sqrt(n!/m!) (2r)^(m-n) L_n^(m-n)(4 r^2) e^(-2 r^2).  Evaluating factorials,
powers and Laguerre polynomials separately overflows long before n_max = 63,
so the series is summed over normalised radial functions

    psi_{n,d}(r) = sqrt(n!/(n+d)!) (2r)^d exp(-2 r^2) L_n^d(4 r^2)

which stay O(1) everywhere and obey a three-term recurrence with O(1)
coefficients; only the n = 0 seed needs a single log-space exponentiation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import GridTooCoarseError
from .fock import DensityMatrix

_QUAD_SOFT_TOL = 1e-3
_QUAD_HARD_TOL = 1e-2


@dataclass(frozen=True)
class CartesianGrid:
    """Rectangular phase-space grid; x is the real axis, y the imaginary one."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("x", "y"):
            ax = np.asarray(getattr(self, name), dtype=float)
            if ax.ndim != 1 or ax.size < 2 or np.any(np.diff(ax) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing with >= 2 points")
            ax = np.ascontiguousarray(ax)
            ax.setflags(write=False)
            object.__setattr__(self, name, ax)


@dataclass(frozen=True)
class PolarGrid:
    """Polar phase-space grid; theta should cover [0, 2 pi] for quadrature."""

    r: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in ("r", "theta"):
            ax = np.asarray(getattr(self, name), dtype=float)
            if ax.ndim != 1 or ax.size < 2 or np.any(np.diff(ax) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing with >= 2 points")
            ax = np.ascontiguousarray(ax)
            ax.setflags(write=False)
            object.__setattr__(self, name, ax)
        if np.any(self.r < 0):
            raise ValueError("radii must be >= 0")


@dataclass(frozen=True)
class WignerGrid:
    """Sampled Wigner values with grid metadata.

    For kind == "cartesian", values[i, j] = W at (x[i], y[j]); for
    kind == "polar", values[i, j] = W at (r[i], theta[j]).
    """

    kind: str
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    source_digest: str
    extent: tuple
    integral: float

    def __post_init__(self):
        if self.kind not in ("cartesian", "polar"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("Wigner values must be finite")
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def default_cartesian_grid(extent: float = 4.5, points: int = 121) -> CartesianGrid:
    ax = np.linspace(-extent, extent, points)
    return CartesianGrid(ax, ax.copy())


def default_polar_grid(r_max: float, n_r: int = 81, n_theta: int = 256) -> PolarGrid:
    """Polar grid with the closing theta = 2 pi point included for quadrature."""
    return PolarGrid(np.linspace(0.0, r_max, n_r), np.linspace(0.0, 2.0 * np.pi, n_theta + 1))


def generalized_laguerre(n: int, k: int, x):
    """Associated Laguerre polynomial L_n^k(x) by the three-term recurrence."""
    if n < 0 or k < 0:
        raise ValueError("need n >= 0 and k >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = k + 1.0 - x
    for i in range(1, n):
        prev, cur = cur, ((2.0 * i + k + 1.0 - x) * cur - (i + k) * prev) / (i + 1.0)
    return cur if cur.ndim else float(cur)


def _radial_seed(d: int, r: np.ndarray) -> np.ndarray:
    """psi_{0,d}(r) = (2r)^d exp(-2r^2) / sqrt(d!), via logs to dodge overflow."""
    if d == 0:
        return np.exp(-2.0 * r * r)
    out = np.zeros_like(r)
    pos = r > 0
    rp = r[pos]
    out[pos] = np.exp(d * np.log(2.0 * rp) - 0.5 * gammaln(d + 1.0) - 2.0 * rp * rp)
    return out


def _band_coefficients(op: np.ndarray, r: np.ndarray) -> list:
    """For each off-diagonal distance d, C_d(r) = sum_n (-1)^n op_{n,n+d} psi_{n,d}(r).

    Returns a list indexed by d; entries are None for bands that are
    identically zero.
    """
    n_dim = op.shape[0]
    x = 4.0 * r * r
    coeffs = [None] * n_dim
    for d in range(n_dim):
        band = np.diagonal(op, offset=d)
        if not np.any(band):
            continue
        signs = (-1.0) ** np.arange(n_dim - d)
        c = band * signs
        psi_prev = _radial_seed(d, r)
        acc = c[0] * psi_prev
        if n_dim - d > 1:
            psi_cur = (d + 1.0 - x) / np.sqrt(d + 1.0) * psi_prev
            acc = acc + c[1] * psi_cur
            for n in range(1, n_dim - d - 1):
                a = (2.0 * n + d + 1.0 - x) / np.sqrt((n + 1.0) * (n + 1.0 + d))
                b = np.sqrt(n * (n + d) / ((n + 1.0) * (n + 1.0 + d)))
                psi_prev, psi_cur = psi_cur, a * psi_cur - b * psi_prev
                acc = acc + c[n + 1] * psi_cur
        coeffs[d] = acc
    return coeffs


def _transform_cartesian(op: np.ndarray, grid: CartesianGrid) -> np.ndarray:
    xg, yg = np.meshgrid(grid.x, grid.y, indexing="ij")
    r = np.hypot(xg, yg).ravel()
    theta = np.arctan2(yg, xg).ravel()
    coeffs = _band_coefficients(op, r)
    w = np.zeros_like(r)
    for d, c in enumerate(coeffs):
        if c is None:
            continue
        if d == 0:
            w += c.real
        else:
            w += 2.0 * (np.cos(d * theta) * c.real - np.sin(d * theta) * c.imag)
    return (2.0 / np.pi) * w.reshape(xg.shape)


def _transform_polar(op: np.ndarray, grid: PolarGrid) -> np.ndarray:
    coeffs = _band_coefficients(op, grid.r)
    w = np.zeros((grid.r.size, grid.theta.size))
    for d, c in enumerate(coeffs):
        if c is None:
            continue
        if d == 0:
            w += c.real[:, None]
        else:
            w += 2.0 * (
                np.outer(c.real, np.cos(d * grid.theta))
                - np.outer(c.imag, np.sin(d * grid.theta))
            )
    return (2.0 / np.pi) * w


def _quadrature(kind: str, grid, values: np.ndarray) -> float:
    if kind == "cartesian":
        return float(np.trapezoid(np.trapezoid(values, grid.y, axis=1), grid.x))
    inner = np.trapezoid(values, grid.theta, axis=1)
    return float(np.trapezoid(inner * grid.r, grid.r))


def _transform(op: np.ndarray, grid, source_digest: str, expected_integral: float) -> WignerGrid:
    if isinstance(grid, CartesianGrid):
        kind, ax1, ax2 = "cartesian", grid.x, grid.y
        values = _transform_cartesian(op, grid)
    elif isinstance(grid, PolarGrid):
        kind, ax1, ax2 = "polar", grid.r, grid.theta
        values = _transform_polar(op, grid)
    else:
        raise TypeError(f"unsupported grid type {type(grid).__name__}")
    integral = _quadrature(kind, grid, values)
    # quadrature residual judged against the operator's overall size, which
    # is 1 for density matrices and larger for generator images
    scale = max(1.0, float(np.sum(np.abs(np.linalg.eigvalsh((op + op.conj().T) / 2.0)))))
    if abs(integral - expected_integral) > _QUAD_HARD_TOL * scale:
        raise GridTooCoarseError(
            f"quadrature gave {integral:.6f}, expected {expected_integral:.6f} "
            f"to within {_QUAD_HARD_TOL * scale:.3g}; grid too coarse or too small"
        )
    extent = (float(ax1[0]), float(ax1[-1]), float(ax2[0]), float(ax2[-1]))
    return WignerGrid(kind, ax1, ax2, values, source_digest, extent, integral)


def wigner_function(rho: DensityMatrix, grid) -> WignerGrid:
    """Wigner function of rho on a cartesian or polar grid.

    The point at the origin equals (2/pi) times the parity expectation; a
    coherent state gives the Gaussian (2/pi) exp(-2 |beta - alpha|^2).
    Raises GridTooCoarseError when the grid quadrature misses the unit
    normalisation by more than 1e-2.
    """
    return _transform(np.asarray(rho.elements), grid, rho.digest(), 1.0)


def sqrt_diffusion_generator_wigner(rho: DensityMatrix, grid) -> WignerGrid:
    """Wigner transform of the sqrt-photon-number double commutator acting on rho.

    The image operator has elements -(sqrt(n) - sqrt(m))^2 rho_{n,m}; for
    large mean photon number nbar its transform approaches
    (1 / 4 nbar) d^2 W / d theta^2.  Diagonal states map to zero.
    """
    n = np.arange(rho.dim.size, dtype=float)
    root = np.sqrt(n)
    weights = -((root[:, None] - root[None, :]) ** 2)
    op = weights * np.asarray(rho.elements)
    return _transform(op, grid, rho.digest(), 0.0)


def fringe_visibility(grid: WignerGrid) -> float:
    """Max minus min of W along the imaginary axis (x = 0 column).

    Quantifies the interference oscillations of a cat state whose lobes sit
    on the real axis.  Requires a cartesian grid containing x = 0.
    """
    if grid.kind != "cartesian":
        raise ValueError("fringe visibility is defined on cartesian grids")
    ix = int(np.argmin(np.abs(grid.axis1)))
    if abs(grid.axis1[ix]) > 1e-9:
        raise ValueError("grid does not contain the x = 0 line")
    line = grid.values[ix, :]
    return float(np.max(line) - np.min(line))
