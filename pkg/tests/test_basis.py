import math

import numpy as np
import pytest

from qis.basis import gram, integrate_against_quantizer_derivative, ito_sum, make_basis
from qis.funcquant import build_brownian_quantizer, default_time_grid
from qis.rng import normals

ALL = [("constant", 1), ("shifted_legendre", 2), ("shifted_legendre", 4), ("shifted_legendre", 8),
       ("karhunen_loeve", 2), ("karhunen_loeve", 4), ("karhunen_loeve", 8), ("haar", 2), ("haar", 4), ("haar", 8)]


def test_legendre_low_orders():
    b1 = make_basis("shifted_legendre", 1, 2.0)
    assert np.allclose(b1.values([0.0, 0.7, 2.0]), 1 / math.sqrt(2.0))
    b2 = make_basis("shifted_legendre", 2, 1.0)
    np.testing.assert_allclose(b2.values([0.0, 0.25, 1.0])[1], [-math.sqrt(3), -math.sqrt(3) / 2, math.sqrt(3)], rtol=1e-15)


def test_first_kl_function():
    t = np.linspace(0, 1, 11)
    np.testing.assert_allclose(make_basis("karhunen_loeve", 1).values(t)[0], math.sqrt(2) * np.sin(math.pi * t / 2), rtol=1e-15)


@pytest.mark.parametrize("kind,m", ALL)
@pytest.mark.parametrize("T", [1.0, 0.5])
def test_gram_is_identity(kind, m, T):
    assert np.max(np.abs(gram(make_basis(kind, m, T)) - np.eye(m))) < 1e-8


def test_trivial_grams():
    assert gram(make_basis("constant", 1)).tolist() == [[pytest.approx(1.0, abs=1e-15)]]
    np.testing.assert_allclose(gram(make_basis("haar", 2)), np.eye(2), atol=1e-14)


def test_haar_wavelets_have_zero_mean():
    G = gram(make_basis("haar", 8))
    assert np.max(np.abs(G[0, 1:])) < 1e-14


@pytest.mark.parametrize("kind,m", [("constant", 2), ("haar", 3), ("haar", 6), ("shifted_legendre", 0), ("fourier", 2)])
def test_invalid_bases(kind, m):
    with pytest.raises(ValueError):
        make_basis(kind, m)


def test_parseval():
    rng = np.random.default_rng(3)
    for kind, m in ALL:
        b = make_basis(kind, m)
        c = rng.normal(size=m)
        t = np.linspace(0, 1, 2**16 + 1)
        # trapezoid is exact enough for these piecewise smooth functions at this density
        norm2 = np.trapezoid(b.theta(c, t) ** 2, t)
        assert norm2 == pytest.approx(c @ c, rel=1e-4)
        from qis.basis import gauss_nodes

        x, w = gauss_nodes(b.breakpoints())
        assert w @ b.theta(c, x) ** 2 == pytest.approx(c @ c, rel=1e-8)


def _kl_cross(m, L):
    # <e_j, f_n'> on [0, 1] for e_j = sqrt2 sin(a_j t), f_n = sqrt2 sin(a_n t), a = (k + 1/2) pi
    out = np.empty((m, L))
    for j in range(m):
        a = (j + 0.5) * math.pi
        for n in range(L):
            b = (n + 0.5) * math.pi
            first = (1 - math.cos(a + b)) / (a + b)
            second = 0.0 if j == n else (1 - math.cos(a - b)) / (a - b)
            out[j, n] = 2 * b * 0.5 * (first + second)
    return out


def test_kl_integrals_match_closed_form():
    q = build_brownian_quantizer(1.0, (5, 3, 2))
    b = make_basis("karhunen_loeve", 4)
    got = integrate_against_quantizer_derivative(b, q)
    np.testing.assert_allclose(got, q.coefficients @ _kl_cross(4, 3).T, atol=1e-10)


def test_zero_path_integrates_to_zero():
    q = build_brownian_quantizer(1.0, (1,))
    for kind, m in ALL:
        assert np.all(integrate_against_quantizer_derivative(make_basis(kind, m), q) == 0)


@pytest.mark.parametrize("kind,m", ALL)
def test_integral_self_convergence(kind, m, kl966):
    b = make_basis(kind, m)
    a = integrate_against_quantizer_derivative(b, kl966, 2048)
    c = integrate_against_quantizer_derivative(b, kl966, 4096)
    assert np.max(np.abs(a - c)) < 1e-9


def test_horizon_mismatch_rejected():
    with pytest.raises(ValueError):
        integrate_against_quantizer_derivative(make_basis("constant", 1, 2.0), build_brownian_quantizer(1.0, (3,)))


def test_ito_sum_trivial_cases():
    grid = default_time_grid(1.0, 50)
    rng = np.random.default_rng(0)
    dW = rng.normal(scale=math.sqrt(0.02), size=(7, 50))
    assert np.all(ito_sum(make_basis("haar", 4), np.zeros((3, 50)), grid) == 0)
    np.testing.assert_allclose(ito_sum(make_basis("constant", 1), dW, grid)[:, 0], dW.sum(axis=1), rtol=1e-14)
    with pytest.raises(ValueError):
        ito_sum(make_basis("constant", 1), dW[:, :10], grid)


def test_ito_isometry():
    n, M = 100_000, 100
    grid = default_time_grid(1.0, M)
    z = normals(11, 0, 0, n, M)
    sums = ito_sum(make_basis("shifted_legendre", 4), z * math.sqrt(1.0 / M), grid)
    second = np.mean(sums**2, axis=0)
    se = np.std(sums**2, axis=0) / math.sqrt(n)
    # the left-point Riemann sum of e_j^2 differs from 1 by O(1/M)
    riemann = np.mean(make_basis("shifted_legendre", 4).values(grid[:-1]) ** 2, axis=1)
    assert np.all(np.abs(second - riemann) < 4 * se)
    assert np.all(np.abs(riemann - 1) < 0.1)
