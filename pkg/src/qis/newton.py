"""Damped Newton-Raphson for smooth strictly convex objectives."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve


@dataclass
class NewtonReport:
    theta_hat: np.ndarray
    iterations: int
    final_grad_norm: float
    objective_value: float
    converged: bool
    trajectory: list = field(default_factory=list)
    halvings: int = 0
    levenberg_shifts: int = 0
    message: str = ""

    def summary(self) -> str:
        theta = " ".join(f"{v:.10g}" for v in np.atleast_1d(self.theta_hat))
        return (
            f"theta_hat = {theta}\n"
            f"iterations = {self.iterations}\n"
            f"grad_norm = {self.final_grad_norm:.3e}\n"
            f"objective = {self.objective_value:.12g}\n"
            f"converged = {self.converged}\n"
            f"backtracking_halvings = {self.halvings}\n"
            f"levenberg_shifts = {self.levenberg_shifts}\n"
            f"message = {self.message}"
        )


def _solve_pd(H, g):
    """Solve H x = g by Cholesky; one Levenberg retry with mu = 1e-8 trace/d."""
    try:
        return cho_solve(cho_factor(H), g), False
    except LinAlgError:
        pass
    d = H.shape[0]
    mu = 1e-8 * np.trace(H) / d
    try:
        return cho_solve(cho_factor(H + mu * np.eye(d)), g), True
    except LinAlgError:
        return None, True


def damped_newton(
    fun: Callable[[np.ndarray], float],
    grad_hess: Callable[[np.ndarray], tuple],
    x0,
    tol: float = 1e-8,
    max_iter: int = 50,
    max_halvings: int = 30,
) -> NewtonReport:
    """Minimise ``fun`` from ``x0``.

    The full Newton step is tried first and halved while the objective does
    not decrease. Stops once the gradient norm is at most ``tol``.
    """
    x = np.array(x0, dtype=float)
    f = fun(x)
    report = NewtonReport(x, 0, np.inf, f, False)
    for it in range(max_iter + 1):
        g, H = grad_hess(x)
        gnorm = float(np.linalg.norm(g))
        report.trajectory.append((x.copy(), gnorm))
        if not np.all(np.isfinite(H)) or not np.all(np.isfinite(g)):
            report.message = "non-finite gradient or Hessian"
            break
        if gnorm <= tol:
            report.converged = True
            report.message = "gradient tolerance reached"
            break
        if it == max_iter:
            report.message = f"no convergence within {max_iter} iterations"
            break
        step, shifted = _solve_pd(H, g)
        report.levenberg_shifts += int(shifted)
        if step is None:
            report.message = "singular Hessian"
            break
        t = 1.0
        # equal values are accepted: near the optimum the decrease falls below rounding
        slack = 8.0 * np.finfo(float).eps * abs(f)
        for _ in range(max_halvings + 1):
            cand = x - t * step
            fc = fun(cand)
            if np.isfinite(fc) and fc <= f + slack:
                break
            t *= 0.5
            report.halvings += 1
        else:
            report.message = "line search failed to decrease the objective"
            break
        x, f = cand, fc
        report.iterations = it + 1
    report.theta_hat = x
    report.final_grad_norm = report.trajectory[-1][1]
    report.objective_value = f
    return report
