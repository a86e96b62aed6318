"""Optimal quadratic quantizers of the scalar standard normal distribution.

In one dimension the normal density is log-concave, so the stationary
quantizer is unique and optimal. Grids are built by Lloyd's fixed point
(cell centroids in closed form) and finished by Newton's method on the same
stationarity equations, whose Jacobian is tridiagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import ndtr, ndtri

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class QuantizerBuildError(RuntimeError):
    """Raised when a quantizer construction does not reach its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


def normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def normal_mass(a, b):
    """P(a < Z < b) for a <= b, without cancellation in either tail."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    upper = a > 0.0
    return np.where(upper, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


@dataclass(frozen=True)
class Grid1D:
    points: np.ndarray
    weights: np.ndarray
    distortion2: float

    @property
    def size(self) -> int:
        return len(self.points)

    def midpoints(self) -> np.ndarray:
        """Cell boundaries, including the infinite ends."""
        return np.concatenate(([-np.inf], 0.5 * (self.points[1:] + self.points[:-1]), [np.inf]))

    def stationarity_residual(self) -> np.ndarray:
        """|E[Z | Z in C_i] - x_i| for every cell."""
        centroids, _ = _centroids(self.points)
        return np.abs(centroids - self.points)

    def project(self, z) -> np.ndarray:
        """Index of the nearest level (lowest index on ties)."""
        mids = self.midpoints()[1:-1]
        return np.searchsorted(mids, np.asarray(z, dtype=float), side="left")


def _cell_moments(x):
    m = np.concatenate(([-np.inf], 0.5 * (x[1:] + x[:-1]), [np.inf]))
    lo, hi = m[:-1], m[1:]
    mass = normal_mass(lo, hi)
    first = normal_pdf(lo) - normal_pdf(hi)
    return m, mass, first


def _centroids(x):
    _, mass, first = _cell_moments(x)
    return first / mass, mass


def _distortion(x) -> float:
    m, mass, first = _cell_moments(x)
    lo, hi = m[:-1], m[1:]
    # E[Z^2; a<Z<b] = P(a<Z<b) + a*phi(a) - b*phi(b); the infinite ends contribute 0.
    lo_term = np.zeros_like(lo)
    hi_term = np.zeros_like(hi)
    lo_term[1:] = lo[1:] * normal_pdf(lo[1:])
    hi_term[:-1] = hi[:-1] * normal_pdf(hi[:-1])
    second = mass + lo_term - hi_term
    per_cell = second - 2.0 * x * first + x * x * mass
    return float(math.fsum(np.maximum(per_cell, 0.0)))


def _newton_step(x):
    """Newton correction for g_i = x_i P_i - M_i = 0 (half the distortion gradient)."""
    m, mass, first = _cell_moments(x)
    g = x * mass - first
    gaps = np.diff(x)
    f_mid = normal_pdf(m[1:-1])
    off = -0.25 * f_mid * gaps
    diag = mass.copy()
    diag[:-1] += off
    diag[1:] += off
    ab = np.zeros((3, len(x)))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, g)


def build_grid_1d(N: int, tol: float = 1e-10, max_iter: int = 10000, lloyd_sweeps: int = 20) -> Grid1D:
    """Optimal quadratic N-quantizer of N(0, 1).

    ``tol`` bounds the largest centroid displacement |E[Z | C_i] - x_i|.
    Raises :class:`QuantizerBuildError` if it is not met within ``max_iter``
    iterations (Lloyd sweeps and Newton steps counted together).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if N == 1:
        return Grid1D(np.zeros(1), np.ones(1), 1.0)

    x = ndtri((np.arange(1, N + 1) - 0.5) / N)
    residual = np.inf
    it = 0
    while it < max_iter:
        it += 1
        c, _ = _centroids(x)
        residual = float(np.max(np.abs(c - x)))
        if residual <= tol:
            break
        if it <= lloyd_sweeps:
            x = c
            continue
        step = _newton_step(x)
        t = 1.0
        while True:
            cand = x - t * step
            if np.all(np.diff(cand) > 0):
                cc, _ = _centroids(cand)
                if np.max(np.abs(cc - cand)) < residual or t < 1e-6:
                    break
            t *= 0.5
        x = cand
    else:
        c, _ = _centroids(x)
        residual = float(np.max(np.abs(c - x)))
        if residual > tol:
            raise QuantizerBuildError(f"1-D grid N={N} did not converge in {max_iter} iterations", residual)

    # symmetric density: enforce exact antisymmetry of the fixed point
    x = 0.5 * (x - x[::-1])
    _, mass = _centroids(x)
    weights = mass / math.fsum(mass)
    return Grid1D(x, weights, _distortion(x))


@lru_cache(maxsize=2048)
def optimal_grid(N: int) -> Grid1D:
    """Memoised :func:`build_grid_1d` with default tolerances."""
    return build_grid_1d(N)


def distortion_table(N_max: int) -> np.ndarray:
    """Squared distortions ``d_N`` for N = 1..N_max (index 0 holds d_1 = 1)."""
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    return np.array([optimal_grid(n).distortion2 for n in range(1, N_max + 1)])


def save_grid_1d(grid: Grid1D, path) -> None:
    lines = [f"1 {grid.size}"]
    lines += [f"{x:.17g} {w:.17g}" for x, w in zip(grid.points, grid.weights)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid_1d(path) -> Grid1D:
    rows = Path(path).read_text().split("\n")
    dim, n = (int(v) for v in rows[0].split())
    if dim != 1:
        raise ValueError(f"{path}: not a 1-D grid file")
    data = np.array([[float(v) for v in r.split()] for r in rows[1 : n + 1]])
    if data.shape != (n, 2):
        raise ValueError(f"{path}: expected {n} rows of 'x w'")
    points = data[:, 0].copy()
    return Grid1D(points, data[:, 1].copy(), _distortion(points))
