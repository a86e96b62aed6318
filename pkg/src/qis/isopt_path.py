"""Quantized Girsanov objective for drifts theta in span(e_1, ..., e_m).

With quantized paths X_i, weights w_i and pathwise integrals
s_i[j] = int e_j d chi_i, the objective in the coefficients c of theta is

    Q(c) = sum_i w_i F(X_i)^2 exp(-c.s_i + |c|^2 / 2),
    J(c) = sum_i w_i F_i^2 e^{Phi_i} (c - s_i),
    H(c) = sum_i w_i F_i^2 e^{Phi_i} (I + (c - s_i)(c - s_i)^T).

The stochastic integral against the quantizer is taken pathwise since every
chi_i is continuously differentiable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .basis import DEFAULT_INTERVALS, BasisSpec, integrate_against_quantizer_derivative
from .funcquant import QuantizedEnsemble
from .isopt_finite import DegenerateObjectiveError
from .newton import NewtonReport, damped_newton

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThetaPath:
    basis: BasisSpec
    coefficients: np.ndarray

    def __call__(self, t) -> np.ndarray:
        return self.basis.theta(self.coefficients, t)

    def l2_norm2(self) -> float:
        return float(self.coefficients @ self.coefficients)

    def to_csv(self, time_grid) -> str:
        t = np.asarray(time_grid, dtype=float)
        rows = ["t,theta"] + [f"{a:.17g},{b:.17g}" for a, b in zip(t, self(t))]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class QuantizedPhiTable:
    integrals: np.ndarray  # (N, m) int e_j d chi_i
    payoffs: np.ndarray  # (N,)
    weights: np.ndarray  # (N,)
    excluded: int = 0

    @property
    def m(self) -> int:
        return self.integrals.shape[1]


def build_phi_table(ensemble: QuantizedEnsemble, basis: BasisSpec, payoff, intervals: int = DEFAULT_INTERVALS) -> QuantizedPhiTable:
    """Evaluate the payoff once per quantized path and the basis integrals against each chi_i.

    ``payoff`` maps an ``(N, M+1)`` array of paths to N values. Paths flagged
    as failed by the diffusion solver are dropped and the remaining weights
    renormalised.
    """
    keep = ~np.asarray(ensemble.failed, dtype=bool)
    excluded = int((~keep).sum())
    if excluded:
        log.warning("excluding %d quantized paths whose ODE solve failed", excluded)
    s = integrate_against_quantizer_derivative(basis, ensemble.quantizer, intervals)[keep]
    values = np.asarray(payoff(ensemble.paths[keep]), dtype=float)
    w = ensemble.weights[keep]
    return QuantizedPhiTable(s, values, w / w.sum(), excluded)


class PathObjective:
    def __init__(self, table: QuantizedPhiTable):
        active = table.payoffs != 0.0
        if not active.any():
            raise DegenerateObjectiveError("payoff vanishes on every quantized path")
        self.s = table.integrals[active]
        self._log_mass = np.log(table.weights[active]) + 2.0 * np.log(np.abs(table.payoffs[active]))
        self.m = table.m

    def _terms(self, c):
        c = np.asarray(c, dtype=float).reshape(self.m)
        return np.exp(self._log_mass - self.s @ c + 0.5 * (c @ c)), c

    def value(self, c) -> float:
        terms, _ = self._terms(c)
        return float(np.sum(terms))

    def grad_hess(self, c):
        terms, c = self._terms(c)
        diff = c[None, :] - self.s
        J = terms @ diff
        H = (diff * terms[:, None]).T @ diff + terms.sum() * np.eye(self.m)
        return J, 0.5 * (H + H.T)


def q_tilde(c, table: QuantizedPhiTable) -> float:
    return PathObjective(table).value(c)


def grad_hess_q_tilde(c, table: QuantizedPhiTable):
    return PathObjective(table).grad_hess(c)


def newton_optimize_path(table: QuantizedPhiTable, c0=None, tol: float = 1e-8, max_iter: int = 50) -> NewtonReport:
    obj = PathObjective(table)
    if c0 is None:
        c0 = np.zeros(obj.m)
    return damped_newton(obj.value, obj.grad_hess, c0, tol=tol, max_iter=max_iter)
