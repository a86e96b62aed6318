import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import norm

from qis import rng
from qis.quant1d import (
    QuantizerBuildError,
    build_grid_1d,
    distortion_table,
    load_grid_1d,
    optimal_grid,
    save_grid_1d,
)


def test_single_point():
    g = build_grid_1d(1)
    assert g.points.tolist() == [0.0]
    assert g.weights.tolist() == [1.0]
    assert g.distortion2 == pytest.approx(1.0, abs=1e-14)


def test_two_points_match_half_normal_centroid():
    g = build_grid_1d(2)
    # centroid of the half normal by quadrature
    c = integrate.quad(lambda x: x * norm.pdf(x), 0, np.inf)[0] / 0.5
    assert c == pytest.approx(math.sqrt(2 / math.pi), abs=1e-12)
    np.testing.assert_allclose(g.points, [-c, c], atol=1e-10)
    np.testing.assert_allclose(g.weights, [0.5, 0.5], atol=1e-15)
    assert g.distortion2 == pytest.approx(1 - 2 / math.pi, abs=1e-10)


def _quad_distortion(g):
    mids = np.clip(g.midpoints(), -12.0, 12.0)
    return sum(
        integrate.quad(lambda x, c=c: (x - c) ** 2 * norm.pdf(x), a, b)[0] for a, b, c in zip(mids[:-1], mids[1:], g.points)
    )


@pytest.mark.parametrize("N", [3, 10, 37])
def test_distortion_matches_quadrature(N):
    g = build_grid_1d(N)
    assert g.distortion2 == pytest.approx(_quad_distortion(g), rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=300))
def test_grid_invariants(N):
    g = optimal_grid(N)
    assert np.all(np.diff(g.points) > 0)
    assert np.all(g.weights > 0)
    assert math.fsum(g.weights) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(g.stationarity_residual())) <= 1e-10
    np.testing.assert_allclose(g.points, -g.points[::-1], atol=1e-12)


def test_distortion_table_strictly_decreasing():
    d = distortion_table(400)
    assert d[0] == 1.0
    assert d[1] == pytest.approx(1 - 2 / math.pi, abs=1e-10)
    assert np.all(np.diff(d) < 0)


def test_zador_trend():
    d = distortion_table(400)
    vals = [N * math.sqrt(d[N - 1]) for N in (50, 100, 200, 400)]
    for a, b in zip(vals, vals[1:]):
        assert abs(b - a) / a < 0.2
    # the limit is the 1-D Zador constant sqrt((1/12)(int phi^{1/3})^3) = sqrt(pi*sqrt(3)/2)
    assert vals[-1] == pytest.approx(math.sqrt(math.pi * math.sqrt(3) / 2), rel=1e-2)


def test_weights_match_sampled_cell_frequencies():
    g = optimal_grid(20)
    z = rng.normals(4, rng.STREAM_CHECK, 0, 1_000_000, 1)[:, 0]
    freq = np.bincount(g.project(z), minlength=20) / z.size
    se = np.sqrt(g.weights * (1 - g.weights) / z.size)
    assert np.all(np.abs(freq - g.weights) <= 4 * se)


def test_project_nearest_point():
    g = optimal_grid(7)
    z = np.linspace(-4, 4, 1001)
    expected = np.argmin(np.abs(z[:, None] - g.points[None, :]), axis=1)
    assert np.array_equal(g.project(z), expected)


def test_cache_round_trip(tmp_path):
    g = optimal_grid(50)
    p = tmp_path / "g.txt"
    save_grid_1d(g, p)
    assert p.read_text().splitlines()[0] == "1 50"
    h = load_grid_1d(p)
    assert np.array_equal(h.points, g.points)
    assert np.array_equal(h.weights, g.weights)


def test_non_convergence_reports_residual():
    with pytest.raises(QuantizerBuildError) as info:
        build_grid_1d(50, tol=1e-300, max_iter=3)
    assert info.value.residual > 0


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_grid_1d(0)
    with pytest.raises(ValueError):
        build_grid_1d(5, tol=0)
