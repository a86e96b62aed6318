"""Orthonormal families of L^2([0, T]) used to parametrise path drifts.

Kinds:

* ``constant``          -- the single function 1/sqrt(T);
* ``shifted_legendre``  -- Legendre polynomials in 2t/T - 1, scaled by sqrt((2n+1)/T);
* ``karhunen_loeve``    -- sqrt(2/T) sin((n + 1/2) pi t / T), n = 0..m-1;
* ``haar``              -- the constant followed by complete dyadic levels
  2^{j/2} psi(2^j t/T - k) / sqrt(T), enumerated level by level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

KINDS = ("constant", "shifted_legendre", "karhunen_loeve", "haar")

DEFAULT_INTERVALS = 2048


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class BasisSpec:
    kind: str
    m: int
    T: float

    def values(self, t) -> np.ndarray:
        """Evaluate e_1..e_m at times ``t``; returns shape ``(m, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = t / self.T
        if self.kind == "constant":
            return np.full((1, t.size), 1.0 / math.sqrt(self.T))
        if self.kind == "shifted_legendre":
            out = np.empty((self.m, t.size))
            for n in range(self.m):
                coef = np.zeros(n + 1)
                coef[n] = 1.0
                out[n] = math.sqrt((2 * n + 1) / self.T) * legendre.legval(2.0 * u - 1.0, coef)
            return out
        if self.kind == "karhunen_loeve":
            n = np.arange(self.m)[:, None]
            return math.sqrt(2.0 / self.T) * np.sin((n + 0.5) * math.pi * u[None, :])
        if self.kind == "haar":
            out = np.empty((self.m, t.size))
            out[0] = 1.0
            row = 1
            level = 0
            while row < self.m:
                scale = 2.0 ** (level / 2.0)
                for k in range(2**level):
                    s = 2.0**level * u - k
                    out[row] = scale * (np.where((s >= 0) & (s < 0.5), 1.0, 0.0) - np.where((s >= 0.5) & (s < 1.0), 1.0, 0.0))
                    row += 1
                level += 1
            return out / math.sqrt(self.T)
        raise ValueError(f"unknown basis kind {self.kind!r}")

    def breakpoints(self) -> np.ndarray:
        """Points splitting [0, T] into pieces on which every e_j is smooth."""
        if self.kind == "haar" and self.m > 1:
            finest = self.m  # levels 0..log2(m)-1 jump on multiples of T/m
            return np.linspace(0.0, self.T, finest + 1)
        return np.array([0.0, self.T])

    def theta(self, coefficients, t) -> np.ndarray:
        """theta(t) = sum_j c_j e_j(t)."""
        c = np.asarray(coefficients, dtype=float)
        if c.shape != (self.m,):
            raise ValueError(f"expected {self.m} coefficients, got shape {c.shape}")
        return c @ self.values(t)

    def metadata(self) -> str:
        return f"{self.kind}(m={self.m}, T={self.T:g}, orthonormal)"


def make_basis(kind: str, m: int, T: float = 1.0) -> BasisSpec:
    if kind not in KINDS:
        raise ValueError(f"unknown basis kind {kind!r}; expected one of {KINDS}")
    if T <= 0:
        raise ValueError("T must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    if kind == "constant" and m != 1:
        raise ValueError("the constant basis has m = 1")
    if kind == "haar" and not _is_power_of_two(m):
        raise ValueError(f"haar basis needs complete dyadic levels (m = 1, 2, 4, 8, ...), got m={m}")
    return BasisSpec(kind, int(m), float(T))


def simpson_nodes(breakpoints, intervals: int = DEFAULT_INTERVALS):
    """Composite Simpson nodes/weights over consecutive pieces.

    ``intervals`` (even) sub-intervals are used inside every piece, so the
    rule never straddles a discontinuity located on a breakpoint.
    """
    if intervals % 2:
        intervals += 1
    nodes, weights = [], []
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        x = np.linspace(a, b, intervals + 1)
        w = np.full(intervals + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        nodes.append(x)
        weights.append(w * (b - a) / (3.0 * intervals))
    return np.concatenate(nodes), np.concatenate(weights)


def _piece_aware_values(basis: BasisSpec, nodes, pieces):
    # Haar jumps sit on piece boundaries; evaluate each piece at its interior
    # side so right-continuous jumps do not leak into the neighbouring piece.
    vals = basis.values(nodes)
    if basis.kind == "haar" and basis.m > 1:
        per = len(nodes) // pieces
        for p in range(pieces):
            end = (p + 1) * per - 1
            eps_t = nodes[end] - 1e-12 * basis.T
            vals[:, end] = basis.values([eps_t])[:, 0]
    return vals


def gauss_nodes(breakpoints, panels: int = 64, order: int = 17):
    """Composite Gauss-Legendre rule with ``panels`` panels of ``order`` points per piece."""
    x, w = legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)[:, None]
        nodes.append((0.5 * (edges[:-1] + edges[1:]))[:, None] + half * x[None, :])
        weights.append(half * w[None, :])
    return np.concatenate([n.ravel() for n in nodes]), np.concatenate([v.ravel() for v in weights])


def gram(basis: BasisSpec) -> np.ndarray:
    """<e_i, e_j> over [0, T] by composite Gauss-Legendre (64 x 17 interior nodes per smooth piece)."""
    nodes, w = gauss_nodes(basis.breakpoints())
    vals = basis.values(nodes)
    return (vals * w) @ vals.T


def integrate_against_quantizer_derivative(basis: BasisSpec, quantizer, intervals: int = DEFAULT_INTERVALS) -> np.ndarray:
    """Pathwise integrals s[i, j] = int_0^T e_j(s) chi_i'(s) ds for every quantizer path.

    ``quantizer`` is a :class:`qis.funcquant.ProductQuantizer`; its paths are
    finite sums of smooth functions whose derivatives are known in closed form.
    Returns an array of shape ``(n_paths, m)``.
    """
    if abs(quantizer.T - basis.T) > 1e-12 * basis.T:
        raise ValueError("basis and quantizer horizons differ")
    bp = basis.breakpoints()
    nodes, w = simpson_nodes(bp, intervals)
    vals = _piece_aware_values(basis, nodes, len(bp) - 1)
    # <e_j, f_l'> for every level function f_l of the quantizer, then combine per path
    cross = (vals * w) @ quantizer.level_derivatives(nodes).T
    return quantizer.coefficients @ cross.T


def ito_sum(basis: BasisSpec, increments, time_grid) -> np.ndarray:
    """Left-point sums sum_k e_j(t_k) dW_k for each row of ``increments``.

    ``increments`` has shape ``(n, M)`` on a grid of M+1 times; returns ``(n, m)``.
    """
    dW = np.atleast_2d(np.asarray(increments, dtype=float))
    grid = np.asarray(time_grid, dtype=float)
    if dW.shape[1] != len(grid) - 1:
        raise ValueError("increments and time grid do not match")
    left = basis.values(grid[:-1])
    return np.stack([(dW * e).sum(axis=1) for e in left], axis=1)
