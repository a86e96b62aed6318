"""Crude and importance-sampled Monte Carlo with common random numbers.

Samples are processed in fixed-size chunks. Every chunk draws its normals
from the counter-based generator at absolute sample offsets, so the value
attached to sample i never depends on how chunks are scheduled. Per-sample
values are concatenated in sample order and reduced with ``math.fsum``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import rng
from .isopt_path import ThetaPath
from .models import LocalVol, discount_factor

CHUNK = 8192
POSITIVITY_FLOOR = np.finfo(float).eps


@dataclass(frozen=True)
class MCResult:
    estimate: float
    sample_variance: float
    std_error: float
    n: int
    seed: int
    theta_used: object = None
    breaches: int = 0
    kind: str = "crude"


@dataclass(frozen=True)
class Comparison:
    crude: MCResult
    qis: MCResult

    @property
    def ratio(self) -> float:
        if self.qis.sample_variance == 0.0:
            return math.inf if self.crude.sample_variance > 0 else 1.0
        return self.crude.sample_variance / self.qis.sample_variance


@lru_cache(maxsize=4)
def _normal_chunk(seed: int, stream: int, start: int, count: int, width: int) -> np.ndarray:
    z = rng.normals(seed, stream, start, count, width)
    z.setflags(write=False)
    return z


def _chunks(n: int):
    return [(s, min(CHUNK, n - s)) for s in range(0, n, CHUNK)]


def _summarise(values: np.ndarray, n: int, seed: int, theta, breaches: int, kind: str) -> MCResult:
    mean = math.fsum(values) / n
    var = math.fsum((values - mean) ** 2) / n
    return MCResult(mean, var, math.sqrt(var / n), n, seed, theta, breaches, kind)


def _run(n: int, threads: int, work):
    """Apply ``work(start, count) -> tuple of arrays/ints`` chunk-wise and stitch results in order."""
    if n < 2:
        raise ValueError("at least two samples are needed")
    jobs = _chunks(n)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: work(*job), jobs))
    else:
        parts = [work(*job) for job in jobs]
    return parts


def _route(model, payoff, route: str) -> str:
    if route not in ("auto", "finite", "path"):
        raise ValueError(f"unknown route {route!r}")
    if route != "auto":
        return route
    return "finite" if payoff.terminal and not isinstance(model, LocalVol) else "path"


# finite-dimensional setting ---------------------------------------------


def _finite_values(model, payoff, z, theta):
    df = discount_factor(payoff, model.r)
    T = payoff.maturity
    if theta is None:
        return df * payoff(model.gaussian_to_terminal(z, T))
    logw = -(z @ theta) - 0.5 * float(theta @ theta)
    return df * payoff(model.gaussian_to_terminal(z + theta, T)) * np.exp(logw)


def _finite_pass(model, payoff, thetas, n, seed, threads):
    d = model.dim

    def work(start, count):
        z = _normal_chunk(seed, rng.STREAM_FINITE, start, count, d)
        return [_finite_values(model, payoff, z, th) for th in thetas]

    parts = _run(n, threads, work)
    return [np.concatenate([p[k] for p in parts]) for k in range(len(thetas))]


def _as_theta_vector(theta, d):
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size == 1 and d > 1:
        theta = np.full(d, float(theta[0]))
    if theta.size != d:
        raise ValueError(f"theta has {theta.size} entries, model has {d} Gaussian drivers")
    return theta


def price_is_finite(model, payoff, theta, n: int, seed: int, threads: int = 1) -> MCResult:
    """E[F(Z + theta) exp(-<theta, Z> - |theta|^2 / 2)] with Z standard normal."""
    th = _as_theta_vector(theta, model.dim)
    (vals,) = _finite_pass(model, payoff, [th], n, seed, threads)
    return _summarise(vals, n, seed, th, 0, "qis_finite")


# path setting ------------------------------------------------------------


def time_grid(T: float, M: int) -> np.ndarray:
    return np.linspace(0.0, T, M + 1)


def _euler(model, z, grid, theta_k):
    """Euler scheme driven by dW + theta dt; returns observed asset paths, log-weights and breaches."""
    dt = np.diff(grid)
    sq = np.sqrt(dt)
    n, M = z.shape
    x = np.empty((n, M + 1))
    x[:, 0] = model.x0
    logw = np.zeros(n)
    breaches = 0
    cur = x[:, 0]
    for k in range(M):
        dW = sq[k] * z[:, k]
        if theta_k is not None:
            th = theta_k[k]
            logw -= th * dW + 0.5 * th * th * dt[k]
            dW = dW + th * dt[k]
        cur = cur + model.drift(cur) * dt[k] + model.vol(cur) * dW
        if model.positive:
            low = cur <= 0.0
            if low.any():
                breaches += int(low.sum())
                cur = np.where(low, POSITIVITY_FLOOR, cur)
        x[:, k + 1] = cur
    return model.observe(grid, x), logw, breaches


def _path_pass(model, payoff, theta_paths, n, seed, M, threads):
    grid = time_grid(payoff.maturity, M)
    df = discount_factor(payoff, model.r)
    thetas = [None if th is None else np.asarray(th(grid[:-1]), dtype=float) for th in theta_paths]

    def evaluate(paths):
        if payoff.terminal:
            return df * payoff(paths[:, -1:])
        return df * payoff(paths, grid, model.asset_vol)

    def work(start, count):
        z = _normal_chunk(seed, rng.STREAM_PATH, start, count, M)
        out = []
        for th in thetas:
            paths, logw, b = _euler(model, z, grid, th)
            vals = evaluate(paths)
            out.append((vals if th is None else vals * np.exp(logw), b))
        return out

    parts = _run(n, threads, work)
    return [
        (np.concatenate([p[k][0] for p in parts]), sum(p[k][1] for p in parts))
        for k in range(len(thetas))
    ]


def price_is_path(model, payoff, theta: ThetaPath, n: int, seed: int, M: int = 100, threads: int = 1) -> MCResult:
    """Girsanov estimator with drift theta on the Euler grid of M steps."""
    ((vals, b),) = _path_pass(model, payoff, [theta], n, seed, M, threads)
    return _summarise(vals, n, seed, theta, b, "qis_path")


# entry points ------------------------------------------------------------


def price_crude(model, payoff, n: int, seed: int, M: int = 100, route: str = "auto", threads: int = 1) -> MCResult:
    if _route(model, payoff, route) == "finite":
        (vals,) = _finite_pass(model, payoff, [None], n, seed, threads)
        return _summarise(vals, n, seed, None, 0, "crude")
    ((vals, b),) = _path_pass(model, payoff, [None], n, seed, M, threads)
    return _summarise(vals, n, seed, None, b, "crude")


def compare(model, payoff, theta, n: int, seed: int, M: int = 100, threads: int = 1) -> Comparison:
    """Crude and QIS estimators on the same normal draws.

    ``theta`` is a vector (finite-dimensional translation) or a ThetaPath
    (Girsanov drift on the Euler grid).
    """
    if isinstance(theta, ThetaPath):
        (cv, cb), (qv, qb) = _path_pass(model, payoff, [None, theta], n, seed, M, threads)
        return Comparison(
            _summarise(cv, n, seed, None, cb, "crude"),
            _summarise(qv, n, seed, theta, qb, "qis_path"),
        )
    th = _as_theta_vector(theta, model.dim)
    cv, qv = _finite_pass(model, payoff, [None, th], n, seed, threads)
    return Comparison(_summarise(cv, n, seed, None, 0, "crude"), _summarise(qv, n, seed, th, 0, "qis_finite"))


CSV_HEADER = ("config_id", "kind", "price", "variance", "stderr", "n", "seed", "theta_ref")


def csv_rows(config_id: str, results, theta_ref: str = "") -> list[tuple]:
    return [
        (config_id, r.kind, f"{r.estimate:.10g}", f"{r.sample_variance:.10g}", f"{r.std_error:.6g}", r.n, r.seed, theta_ref if r.theta_used is not None else "")
        for r in results
    ]


def write_csv(rows, header=CSV_HEADER) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
