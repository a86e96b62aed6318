import math

import numpy as np
import pytest

from qis.density import gaussian, logistic
from qis.isopt_finite import (
    DegenerateObjectiveError,
    QuantizedObjective,
    grad_q_hat,
    hess_q_hat,
    newton_optimize,
    q_hat,
)
from qis.newton import _solve_pd, damped_newton
from qis.quant1d import Grid1D, optimal_grid
from qis.quantnd import build_grid_nd


def call(x):
    return np.maximum(np.exp(x[:, 0]) - 1.0, 0.0)


def one(x):
    return np.ones(len(x))


@pytest.fixture(scope="module")
def grid2d():
    return build_grid_nd(2, 60, n_samples=200_000, seed=4, sweeps=30, warmup_sweeps=50)


def basket2(x):
    s = 50 * np.exp(-0.045 + 0.3 * x)
    return np.maximum(s.mean(axis=1) - 50.0, 0.0)


TWO = Grid1D(np.array([-1.0, 1.0]), np.array([0.5, 0.5]), 2.0)


def test_constant_payoff_at_zero():
    g = optimal_grid(50)
    assert q_hat(np.zeros(1), g, one, gaussian(1)) == pytest.approx(1.0, abs=1e-14)
    assert abs(grad_q_hat(np.zeros(1), g, one, gaussian(1))[0]) < 1e-12
    H = hess_q_hat(np.zeros(1), g, one, gaussian(1))
    assert H[0, 0] == pytest.approx(1 + g.weights @ g.points**2, rel=1e-14)


def test_constant_payoff_jensen_bound():
    g = optimal_grid(50)
    for th in (-1.0, 0.3, 2.0):
        assert q_hat(np.array([th]), g, one, gaussian(1)) >= math.exp(th * th / 2) * (1 - 1e-12)


def test_two_point_grid_hand_computation():
    # Q = e^{t^2/2} cosh t, Q' = e^{t^2/2}(t cosh t + sinh t), Q'' = e^{t^2/2}((2 + t^2) cosh t + 2 t sinh t)
    sq = lambda x: x[:, 0] ** 2
    for t in (-0.8, 0.0, 0.45, 1.7):
        e = math.exp(t * t / 2)
        th = np.array([t])
        assert q_hat(th, TWO, sq, gaussian(1)) == pytest.approx(e * math.cosh(t), rel=1e-14)
        assert grad_q_hat(th, TWO, sq, gaussian(1))[0] == pytest.approx(e * (t * math.cosh(t) + math.sinh(t)), rel=1e-13, abs=1e-15)
        H = hess_q_hat(th, TWO, sq, gaussian(1))[0, 0]
        assert H == pytest.approx(e * ((2 + t * t) * math.cosh(t) + 2 * t * math.sinh(t)), rel=1e-13)


def _fd_check(obj, thetas, h=1e-5):
    worst_g = worst_h = 0.0
    for th in thetas:
        g, H = obj.grad_hess(th)
        fd_g = np.empty_like(th)
        fd_H = np.empty((len(th), len(th)))
        for k in range(len(th)):
            e = np.zeros_like(th)
            e[k] = h
            fd_g[k] = (obj.value(th + e) - obj.value(th - e)) / (2 * h)
            fd_H[:, k] = (obj.grad_hess(th + e)[0] - obj.grad_hess(th - e)[0]) / (2 * h)
        worst_g = max(worst_g, np.linalg.norm(g - fd_g) / np.linalg.norm(g))
        worst_h = max(worst_h, np.linalg.norm(H - fd_H) / np.linalg.norm(H))
    return worst_g, worst_h


def test_derivatives_match_finite_differences(grid2d):
    obj = QuantizedObjective(grid2d.points, grid2d.weights, basket2(grid2d.points), gaussian(2))
    thetas = np.random.default_rng(8).uniform(-2, 2, size=(100, 2))
    gerr, herr = _fd_check(obj, thetas)
    assert gerr < 1e-5 and herr < 1e-5


def test_logistic_derivatives_match_finite_differences():
    g = optimal_grid(80)
    lg = logistic()
    pts = g.points[:, None]
    obj = QuantizedObjective(pts, g.weights, np.maximum(pts[:, 0], 0) + 0.1, lg)
    gerr, herr = _fd_check(obj, np.random.default_rng(9).uniform(-1.5, 1.5, size=(100, 1)))
    assert gerr < 1e-5 and herr < 1e-5


def test_hessian_is_positive_definite(grid2d):
    obj = QuantizedObjective(grid2d.points, grid2d.weights, basket2(grid2d.points), gaussian(2))
    for th in np.random.default_rng(10).uniform(-3, 3, size=(50, 2)):
        H = obj.hessian(th)
        np.testing.assert_array_equal(H, H.T)
        np.linalg.cholesky(H)


def test_convexity_on_random_pairs(grid2d):
    obj = QuantizedObjective(grid2d.points, grid2d.weights, basket2(grid2d.points), gaussian(2))
    rng = np.random.default_rng(11)
    for _ in range(100):
        a, b = rng.uniform(-3, 3, size=(2, 2))
        mid = obj.value(0.5 * (a + b))
        assert mid <= (0.5 * obj.value(a) + 0.5 * obj.value(b)) * (1 + 1e-12)


def test_log_space_matches_direct_ratio(grid2d):
    F = basket2(grid2d.points)
    obj = QuantizedObjective(grid2d.points, grid2d.weights, F, gaussian(2))
    dens = gaussian(2)
    for th in np.random.default_rng(12).uniform(-2, 2, size=(20, 2)) / math.sqrt(2):
        ratio = np.exp(dens.log_density(grid2d.points)) / np.exp(dens.log_density(grid2d.points - th))
        direct = math.fsum(grid2d.weights * F**2 * ratio)
        assert obj.value(th) == pytest.approx(direct, rel=1e-12)


def test_degenerate_payoff_rejected():
    with pytest.raises(DegenerateObjectiveError):
        newton_optimize(optimal_grid(20), lambda x: np.zeros(len(x)), gaussian(1))


def test_constant_payoff_optimum_is_zero():
    rep = newton_optimize(optimal_grid(200), one, gaussian(1))
    assert rep.converged and rep.iterations <= 3
    assert abs(rep.theta_hat[0]) <= 1e-6


def test_newton_matches_grid_scan():
    g = optimal_grid(200)
    rep = newton_optimize(g, call, gaussian(1))
    assert rep.converged and rep.final_grad_norm <= 1e-8
    scan = np.arange(0.0, 4.0, 1e-3)
    obj = QuantizedObjective(g.points[:, None], g.weights, call(g.points[:, None]), gaussian(1))
    best = scan[np.argmin([obj.value(np.array([t])) for t in scan])]
    assert abs(rep.theta_hat[0] - best) <= 2e-3


def test_refinement_is_cauchy_like():
    thetas = [newton_optimize(optimal_grid(N), call, gaussian(1)).theta_hat[0] for N in (50, 100, 200, 400)]
    gaps = np.abs(np.diff(thetas))
    assert np.all(np.diff(gaps) < 0)


def test_iteration_limit_reported():
    rep = newton_optimize(optimal_grid(200), call, gaussian(1), max_iter=1)
    assert not rep.converged and rep.iterations == 1
    assert "no convergence" in rep.message
    assert len(rep.trajectory) == 2


def test_backtracking_rescues_overshooting_newton():
    # pure Newton on sqrt(1 + x^2) maps x to -x^3 and diverges from |x| > 1
    f = lambda x: math.sqrt(1 + x[0] ** 2)
    gh = lambda x: (np.array([x[0] / math.sqrt(1 + x[0] ** 2)]), np.array([[(1 + x[0] ** 2) ** -1.5]]))
    rep = damped_newton(f, gh, [3.0])
    assert rep.converged and rep.halvings > 0
    assert abs(rep.theta_hat[0]) < 1e-8


def test_levenberg_shift_on_singular_hessian():
    step, shifted = _solve_pd(np.diag([2.0, 0.0]), np.array([1.0, 0.0]))
    assert shifted
    np.testing.assert_allclose(step, [0.5, 0.0], rtol=1e-7)
    step, shifted = _solve_pd(np.diag([2.0, 4.0]), np.array([1.0, 1.0]))
    assert not shifted
