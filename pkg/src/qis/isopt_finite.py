"""Quantized variance objective for mean-translation importance sampling in R^d.

For a quantization grid (x_i, w_i) of X with density p the second moment of
the translated estimator is approximated by

    Q(theta) = sum_i w_i F(x_i)^2 p(x_i) / p(x_i - theta),

which is strictly convex as soon as one F(x_i) is non-zero; its minimiser is
found by damped Newton-Raphson from theta = 0.
"""

from __future__ import annotations

import numpy as np

from .density import DensityModel
from .newton import NewtonReport, damped_newton


class DegenerateObjectiveError(ValueError):
    """Every payoff value on the grid is zero: the objective has no minimiser."""


class QuantizedObjective:
    """Q, DQ and D^2Q on a fixed grid, with payoff values evaluated once."""

    def __init__(self, points, weights, payoff_values, density: DensityModel):
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        f = np.asarray(payoff_values, dtype=float)
        if not np.all(np.isfinite(f)):
            raise ValueError("payoff values must be finite")
        active = f != 0.0
        if not active.any():
            raise DegenerateObjectiveError("payoff vanishes on every grid point; the objective is constant")
        self.density = density
        self.points = points[active]
        # log of w_i F(x_i)^2 p(x_i); the ratio's denominator is added per theta
        self._log_mass = np.log(np.asarray(weights, dtype=float)[active]) + 2.0 * np.log(np.abs(f[active]))
        self.dim = points.shape[1]

    def _terms(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(self.dim)
        return np.exp(self._log_mass + self.density.log_ratio(self.points, theta)), theta

    def value(self, theta) -> float:
        terms, _ = self._terms(theta)
        return float(np.sum(terms))

    def gradient(self, theta) -> np.ndarray:
        terms, theta = self._terms(theta)
        return terms @ self.density.score(self.points - theta)

    def hessian(self, theta) -> np.ndarray:
        terms, theta = self._terms(theta)
        s = self.density.score(self.points - theta)
        curv = self.density.curvature(self.points - theta)
        outer = 2.0 * s[:, :, None] * s[:, None, :] - curv
        H = np.tensordot(terms, outer, axes=1)
        if not np.all(np.isfinite(H)):
            raise FloatingPointError("non-finite Hessian")
        return 0.5 * (H + H.T)

    def grad_hess(self, theta):
        terms, theta = self._terms(theta)
        s = self.density.score(self.points - theta)
        curv = self.density.curvature(self.points - theta)
        g = terms @ s
        H = np.tensordot(terms, 2.0 * s[:, :, None] * s[:, None, :] - curv, axes=1)
        return g, 0.5 * (H + H.T)


def _grid_arrays(grid):
    return np.asarray(grid.points, dtype=float), np.asarray(grid.weights, dtype=float)


def _objective(theta, grid, payoff, density):
    points, weights = _grid_arrays(grid)
    pts = points if points.ndim == 2 else points[:, None]
    return QuantizedObjective(pts, weights, payoff(pts), density)


def q_hat(theta, grid, payoff, density: DensityModel) -> float:
    """Quantized second moment at ``theta``; ``payoff`` maps an ``(N, d)`` array to N values."""
    return _objective(theta, grid, payoff, density).value(theta)


def grad_q_hat(theta, grid, payoff, density: DensityModel) -> np.ndarray:
    return _objective(theta, grid, payoff, density).gradient(theta)


def hess_q_hat(theta, grid, payoff, density: DensityModel) -> np.ndarray:
    return _objective(theta, grid, payoff, density).hessian(theta)


def newton_optimize(grid, payoff, density: DensityModel, theta0=None, tol: float = 1e-8, max_iter: int = 50) -> NewtonReport:
    """Minimiser of the quantized objective by damped Newton-Raphson."""
    points, weights = _grid_arrays(grid)
    pts = points if points.ndim == 2 else points[:, None]
    obj = QuantizedObjective(pts, weights, payoff(pts), density)
    if theta0 is None:
        theta0 = np.zeros(obj.dim)
    return damped_newton(obj.value, obj.grad_hess, theta0, tol=tol, max_iter=max_iter)
