"""Quadratic quantizers of the d-dimensional standard normal by batch Lloyd.

A fixed cloud of seeded normal samples stands in for the distribution. Each
sweep assigns every sample to its nearest point and moves each point to the
mean of its cell, so the empirical distortion never increases.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from . import rng

log = logging.getLogger(__name__)

_ASSIGN_BLOCK = 65536


@dataclass(frozen=True)
class GridND:
    dim: int
    points: np.ndarray  # (N, d)
    weights: np.ndarray  # (N,)
    distortion2_estimate: float
    build_seed: int
    resets: int = 0
    history: tuple = field(default=(), compare=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]


def _assign(samples: np.ndarray, points: np.ndarray):
    """Nearest point index and squared distance for every sample (exhaustive)."""
    n = samples.shape[0]
    idx = np.empty(n, dtype=np.int64)
    d2 = np.empty(n)
    # |x - c|^2 - |x|^2 = [x, 1] . [-2c, |c|^2], one matrix product per block
    aug = np.vstack([-2.0 * points.T, np.einsum("ij,ij->i", points, points)[None, :]])
    lhs = np.empty((min(n, _ASSIGN_BLOCK), samples.shape[1] + 1))
    lhs[:, -1] = 1.0
    for s in range(0, n, _ASSIGN_BLOCK):
        x = samples[s : s + _ASSIGN_BLOCK]
        m = len(x)
        lhs[:m, :-1] = x
        j = np.argmin(lhs[:m] @ aug, axis=1)
        idx[s : s + m] = j
        diff = x - points[j]
        d2[s : s + m] = np.einsum("ij,ij->i", diff, diff)
    return idx, d2


def _cell_stats(samples, idx, N):
    counts = np.bincount(idx, minlength=N)
    sums = np.stack([np.bincount(idx, weights=samples[:, k], minlength=N) for k in range(samples.shape[1])], axis=1)
    return counts, sums


def sample_cloud(d: int, n_samples: int, seed: int, start: int = 0) -> np.ndarray:
    """Latin hypercube normal cloud: every coordinate has one draw in each of n equiprobable strata.

    ``start`` offsets the generator counter so that independent clouds can be
    drawn from the same seed.
    """
    u = rng.uniforms(seed, rng.STREAM_GRID, start, n_samples, 2 * d)
    strata = np.argsort(u[:, :d], axis=0, kind="stable")
    return ndtri((strata + u[:, d:]) / n_samples)


def _lloyd(samples, points, sweeps):
    """Lloyd sweeps on a fixed sample set; returns points, counts, distortion history, resets."""
    n, N = samples.shape[0], points.shape[0]
    resets = 0
    history = []
    prev = None
    for sweep in range(sweeps + 1):
        idx, d2 = _assign(samples, points)
        if prev is not None and np.array_equal(idx, prev):
            counts, _ = _cell_stats(samples, idx, N)
            break
        prev = idx
        history.append(math.fsum(d2) / n)
        counts, sums = _cell_stats(samples, idx, N)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            # splitting rule: move each unused point onto a distinct far-away sample
            far = np.argsort(-d2, kind="stable")[: empty.size]
            points = points.copy()
            points[empty] = samples[far]
            resets += empty.size
            log.info("sweep %d: re-seeded %d empty cells", sweep, empty.size)
            continue
        if sweep == sweeps:
            break
        points = sums / counts[:, None]
    return points, counts, history, resets


def build_grid_nd(
    d: int,
    N: int,
    n_samples: int = 1_000_000,
    seed: int = 0,
    sweeps: int = 30,
    warmup_sweeps: int = 200,
) -> GridND:
    """Randomized Lloyd quantizer of N(0, I_d) with N points.

    The codebook starts from samples dilated by sqrt((d+2)/d), which matches
    the asymptotically optimal point density, and is first relaxed by
    ``warmup_sweeps`` cheap sweeps on a subsample before ``sweeps`` sweeps on
    the full cloud. Empty cells are re-seeded at the samples farthest from
    their points and counted on the result.
    """
    if d < 1 or N < 1:
        raise ValueError("dimension and size must be positive")
    if n_samples < 10 * N:
        raise ValueError(f"n_samples={n_samples} is too small for {N} points")
    samples = sample_cloud(d, n_samples, seed)
    stride = np.linspace(0, n_samples - 1, N).astype(np.int64)
    points = math.sqrt((d + 2) / d) * samples[stride]
    # warm-up cloud sized so one sweep costs about as much for any N
    n_warm = min(n_samples, max(200 * N, 2_000_000 // N))
    warm = sample_cloud(d, n_warm, seed, start=n_samples)
    points, _, _, warm_resets = _lloyd(warm, points, warmup_sweeps)
    points, counts, history, resets = _lloyd(samples, points, sweeps)
    if np.any(counts == 0):
        raise RuntimeError("empty cells remain after the last sweep")
    weights = counts / n_samples
    return GridND(d, points, weights, history[-1], seed, warm_resets + resets, tuple(history))


def nearest_cell(grid: GridND, x) -> int:
    """Index of the closest grid point; ties go to the lowest index."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != grid.dim:
        raise ValueError(f"point has dimension {x.size}, grid has {grid.dim}")
    diff = grid.points - x
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


def save_grid_nd(grid: GridND, path) -> None:
    lines = [f"{grid.dim} {grid.size} {grid.build_seed}"]
    for w, p in zip(grid.weights, grid.points):
        lines.append(" ".join(f"{v:.17g}" for v in (w, *p)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid_nd(path) -> GridND:
    rows = Path(path).read_text().split("\n")
    d, N, seed = (int(v) for v in rows[0].split())
    data = np.array([[float(v) for v in r.split()] for r in rows[1 : N + 1]])
    if data.shape != (N, d + 1):
        raise ValueError(f"{path}: expected {N} rows of {d + 1} numbers")
    w, pts = data[:, 0], data[:, 1:]
    return GridND(d, pts, w, float("nan"), seed)
