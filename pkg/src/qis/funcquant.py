"""Product functional quantizers of Brownian motion and of the centred OU process.

A Brownian product quantizer quantizes the first L Karhunen-Loeve coordinates
independently with optimal 1-D grids of sizes N_1 >= ... >= N_L. Its paths

    chi_i(t) = sum_l sqrt(lambda_l) x^{(l)}_{i_l} e_l(t)

are smooth, so diffusions driven by them reduce to ODEs, solved here by an
explicit Runge-Kutta scheme with step control.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .quant1d import Grid1D, distortion_table, optimal_grid


def kl_eigensystem(T: float, n: int):
    """Eigenvalue lambda_n and eigenfunction e_n of the Brownian covariance on [0, T]."""
    if n < 1 or T <= 0:
        raise ValueError("need n >= 1 and T > 0")
    freq = math.pi * (n - 0.5) / T
    lam = (T / (math.pi * (n - 0.5))) ** 2

    def e_n(t):
        return math.sqrt(2.0 / T) * np.sin(freq * np.asarray(t, dtype=float))

    return lam, e_n


def kl_eigenvalues(T: float, L: int) -> np.ndarray:
    n = np.arange(1, L + 1)
    return (T / (math.pi * (n - 0.5))) ** 2


def brownian_distortion2(T: float, decomposition, d_table=None) -> float:
    """Squared quadratic error of the product quantizer: sum lambda_l d_{N_l} + tail."""
    decomposition = tuple(decomposition)
    if d_table is None:
        d_table = distortion_table(max(decomposition))
    lam = kl_eigenvalues(T, len(decomposition))
    head = math.fsum(lam[l] * d_table[n - 1] for l, n in enumerate(decomposition))
    tail = 0.5 * T * T - math.fsum(lam)
    return head + tail


def optimal_decomposition(N_budget: int, L_max: int = 64, d_table=None) -> tuple[int, ...]:
    """Non-increasing sizes (N_1, ..., N_L) with product <= N_budget minimising the distortion.

    Exhaustive search over all such decompositions; the result is independent
    of T since every eigenvalue scales with T^2. Ties go to the
    lexicographically largest decomposition.
    """
    if N_budget < 1:
        raise ValueError("N_budget must be >= 1")
    if L_max < 1:
        raise ValueError("L_max must be >= 1")
    if d_table is None:
        d_table = distortion_table(N_budget)
    if len(d_table) < N_budget:
        raise ValueError("distortion table too short for the budget")
    depth = min(L_max, max(1, int(math.log2(N_budget)) + 1))
    lam = kl_eigenvalues(1.0, depth)
    # gain of quantizing level l with n points instead of 1
    best_gain, best = 0.0, (1,)

    def search(prefix, gain, budget, cap):
        nonlocal best_gain, best
        if prefix and (gain > best_gain * (1 + 1e-14) or (abs(gain - best_gain) <= 1e-14 * best_gain and tuple(prefix) > best)):
            best_gain, best = gain, tuple(prefix)
        level = len(prefix)
        if level >= depth:
            return
        for n in range(2, min(cap, budget) + 1):
            search(prefix + [n], gain + lam[level] * (1.0 - d_table[n - 1]), budget // n, n)

    search([], 0.0, N_budget, N_budget)
    return best


def _kl_values(T, L, t):
    n = np.arange(1, L + 1)[:, None]
    return math.sqrt(2.0 / T) * np.sin(math.pi * (n - 0.5) * np.asarray(t, dtype=float)[None, :] / T)


def _kl_derivatives(T, L, t):
    n = np.arange(1, L + 1)[:, None]
    freq = math.pi * (n - 0.5) / T
    return math.sqrt(2.0 / T) * freq * np.cos(freq * np.asarray(t, dtype=float)[None, :])


def _ou_values(T, L, theta, t):
    n = np.arange(1, L + 1)[:, None]
    freq = math.pi * (n - 0.5) / T
    t = np.asarray(t, dtype=float)[None, :]
    return math.sqrt(2.0 / T) * (freq * np.sin(freq * t) + theta * (np.cos(freq * t) - np.exp(-theta * t)))


def _ou_derivatives(T, L, theta, t):
    n = np.arange(1, L + 1)[:, None]
    freq = math.pi * (n - 0.5) / T
    t = np.asarray(t, dtype=float)[None, :]
    return math.sqrt(2.0 / T) * (freq * freq * np.cos(freq * t) + theta * (-freq * np.sin(freq * t) + theta * np.exp(-theta * t)))


@dataclass(frozen=True)
class ProductQuantizer:
    """Finite product quantizer; path i is ``coefficients[i] @ level_values(t)``."""

    T: float
    decomposition: tuple[int, ...]
    levels: tuple[Grid1D, ...]
    eigenvalues: np.ndarray
    multi_indices: np.ndarray
    weights: np.ndarray
    coefficients: np.ndarray
    kind: str = "brownian"
    ou_theta: float | None = None
    ou_sigma: float | None = None
    brownian: "ProductQuantizer | None" = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def L(self) -> int:
        return len(self.decomposition)

    def level_values(self, t) -> np.ndarray:
        if self.kind == "brownian":
            return _kl_values(self.T, self.L, t)
        return _ou_values(self.T, self.L, self.ou_theta, t)

    def level_derivatives(self, t) -> np.ndarray:
        if self.kind == "brownian":
            return _kl_derivatives(self.T, self.L, t)
        return _ou_derivatives(self.T, self.L, self.ou_theta, t)

    def paths(self, t) -> np.ndarray:
        """All paths sampled at times ``t``: shape ``(size, len(t))``."""
        return self.coefficients @ self.level_values(np.atleast_1d(t))

    def derivatives(self, t) -> np.ndarray:
        return self.coefficients @ self.level_derivatives(np.atleast_1d(t))

    def distortion2(self) -> float:
        if self.kind != "brownian":
            raise ValueError("analytic distortion is only available for Brownian quantizers")
        return brownian_distortion2(self.T, self.decomposition)


def _product(levels, scale):
    """Multi-indices (lexicographic), weights and coefficients of a product grid."""
    sizes = [g.size for g in levels]
    idx = np.array(list(itertools.product(*[range(s) for s in sizes])), dtype=int).reshape(-1, len(sizes))
    weights = np.ones(len(idx))
    coeffs = np.empty((len(idx), len(sizes)))
    for l, g in enumerate(levels):
        weights = weights * g.weights[idx[:, l]]
        coeffs[:, l] = scale[l] * g.points[idx[:, l]]
    return idx, weights, coeffs


def _check_decomposition(decomposition):
    decomposition = tuple(int(n) for n in decomposition)
    if not decomposition or any(n < 1 for n in decomposition):
        raise ValueError(f"invalid decomposition {decomposition}")
    return decomposition


def build_brownian_quantizer(T: float, decomposition) -> ProductQuantizer:
    decomposition = _check_decomposition(decomposition)
    if T <= 0:
        raise ValueError("T must be positive")
    levels = tuple(optimal_grid(n) for n in decomposition)
    lam = kl_eigenvalues(T, len(decomposition))
    idx, weights, coeffs = _product(levels, np.sqrt(lam))
    return ProductQuantizer(float(T), decomposition, levels, lam, idx, weights, coeffs)


def build_ou_quantizer(T: float, theta_ou: float, sigma_ou: float, decomposition) -> ProductQuantizer:
    """Product quantizer of Y with dY = -theta Y dt + sigma dW, Y_0 = 0.

    Paths are sigma * sum_n x_{i_n} c_n phi_n(t) with
    c_n = T^2 / ((pi (n-1/2))^2 + (theta T)^2); they solve the same linear
    ODE as Y with dW replaced by the Brownian quantizer path of the same
    multi-index, which is kept in ``.brownian``.
    """
    if theta_ou <= 0:
        raise ValueError("mean reversion must be positive")
    bq = build_brownian_quantizer(T, decomposition)
    n = np.arange(1, bq.L + 1)
    c = T * T / ((math.pi * (n - 0.5)) ** 2 + (theta_ou * T) ** 2)
    _, _, coeffs = _product(bq.levels, sigma_ou * c)
    return ProductQuantizer(
        bq.T, bq.decomposition, bq.levels, bq.eigenvalues, bq.multi_indices, bq.weights, coeffs,
        kind="ornstein_uhlenbeck", ou_theta=float(theta_ou), ou_sigma=float(sigma_ou), brownian=bq,
    )


def save_quantizer(q: ProductQuantizer, path) -> None:
    if q.kind != "brownian":
        raise ValueError("only Brownian quantizers are cached")
    lines = [" ".join([f"{q.T:.17g}", str(q.L)] + [str(n) for n in q.decomposition])]
    for w, c in zip(q.weights, q.coefficients):
        lines.append(" ".join(f"{v:.17g}" for v in (w, *c)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_quantizer(path) -> ProductQuantizer:
    rows = [r for r in Path(path).read_text().split("\n") if r.strip()]
    head = rows[0].split()
    T, L = float(head[0]), int(head[1])
    decomposition = tuple(int(v) for v in head[2 : 2 + L])
    data = np.array([[float(v) for v in r.split()] for r in rows[1:]])
    q = build_brownian_quantizer(T, decomposition)
    if data.shape != (q.size, L + 1):
        raise ValueError(f"{path}: expected {q.size} rows of {L + 1} values")
    return ProductQuantizer(q.T, q.decomposition, q.levels, q.eigenvalues, q.multi_indices, data[:, 0].copy(), data[:, 1:].copy())


@dataclass(frozen=True)
class QuantizedEnsemble:
    """Quantized process sampled on ``time_grid`` with the source quantizer's weights."""

    time_grid: np.ndarray
    paths: np.ndarray
    weights: np.ndarray
    brownian_paths: np.ndarray
    quantizer: ProductQuantizer
    failed: np.ndarray

    @property
    def n_failed(self) -> int:
        return int(self.failed.sum())


def default_time_grid(T: float, M: int = 100) -> np.ndarray:
    return np.linspace(0.0, T, M + 1)


def _brownian_of(q: ProductQuantizer) -> ProductQuantizer:
    return q if q.kind == "brownian" else q.brownian


def ensemble_from_paths(q: ProductQuantizer, time_grid, paths, failed=None) -> QuantizedEnsemble:
    bq = _brownian_of(q)
    if failed is None:
        failed = ~np.all(np.isfinite(paths), axis=1)
    return QuantizedEnsemble(np.asarray(time_grid, dtype=float), paths, bq.weights, bq.paths(time_grid), bq, failed)


def bs_exponential_paths(quantizer: ProductQuantizer, r: float, sigma: float, S0: float, time_grid) -> QuantizedEnsemble:
    """S0 exp((r - sigma^2/2) t + sigma chi_i(t)) on the time grid."""
    t = np.asarray(time_grid, dtype=float)
    chi = _brownian_of(quantizer).paths(t)
    paths = S0 * np.exp((r - 0.5 * sigma * sigma) * t[None, :] + sigma * chi)
    return ensemble_from_paths(quantizer, t, paths)


# Runge-Kutta tableaux ----------------------------------------------------

_RK4 = (
    np.array([0.0, 0.5, 0.5, 1.0]),
    [[], [0.5], [0.0, 0.5], [0.0, 0.0, 1.0]],
    np.array([1 / 6, 1 / 3, 1 / 3, 1 / 6]),
    None,
)

# Cash-Karp: six stages, fifth-order solution with an embedded fourth-order estimate
_CK = (
    np.array([0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8]),
    [
        [],
        [1 / 5],
        [3 / 40, 9 / 40],
        [3 / 10, -9 / 10, 6 / 5],
        [-11 / 54, 5 / 2, -70 / 27, 35 / 27],
        [1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096],
    ],
    np.array([37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771]),
    np.array([2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4]),
)

METHODS = {"rk4": _RK4, "cash_karp": _CK}


def _rk_step(f, t, x, h, tableau):
    c, a, b, b_hat = tableau
    k = []
    for i in range(len(c)):
        xi = x
        for j, aij in enumerate(a[i]):
            if aij:
                xi = xi + h * aij * k[j]
        k.append(f(t + c[i] * h, xi))
    x_new = x + h * sum(bi * ki for bi, ki in zip(b, k) if bi)
    err = None
    if b_hat is not None:
        err = h * sum((bi - bhi) * ki for bi, bhi, ki in zip(b, b_hat, k))
    return x_new, err


def _integrate_interval(f, t0, t1, x, n, tableau):
    h = (t1 - t0) / n
    err = np.zeros_like(x)
    for s in range(n):
        x, e = _rk_step(f, t0 + s * h, x, h, tableau)
        if e is not None:
            err = np.maximum(err, np.abs(e))
    return x, err


def quantize_diffusion(
    drift: Callable,
    vol: Callable,
    vol_prime: Callable,
    x0: float,
    quantizer: ProductQuantizer,
    time_grid,
    method: str = "rk4",
    tol: float = 1e-10,
    positive: bool = False,
    min_substeps: int = 1,
    max_substeps: int = 4096,
) -> QuantizedEnsemble:
    """Solve x_i' = (b - sigma sigma'/2)(x_i) + sigma(x_i) chi_i'(t), x_i(0) = x0, for every path.

    On each grid interval the number of substeps doubles until the local
    error estimate (step doubling for ``rk4``, the embedded pair for
    ``cash_karp``) is below ``tol * max(1, |x|)`` on every path. Paths that
    leave the state domain (non-finite, or non-positive when ``positive``)
    are flagged in ``failed`` and carry NaN from then on.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(METHODS)}")
    tableau = METHODS[method]
    bq = _brownian_of(quantizer)
    grid = np.asarray(time_grid, dtype=float)
    coeffs = bq.coefficients

    def rhs(t, x):
        dchi = coeffs @ bq.level_derivatives(np.array([t]))[:, 0]
        s = vol(x)
        return drift(x) - 0.5 * s * vol_prime(x) + s * dchi

    N = bq.size
    out = np.empty((N, len(grid)))
    x = np.full(N, float(x0))
    out[:, 0] = x
    failed = np.zeros(N, dtype=bool)
    n = max(1, int(min_substeps))
    for k in range(len(grid) - 1):
        t0, t1 = grid[k], grid[k + 1]
        while True:
            with np.errstate(all="ignore"):
                if tableau[3] is None:
                    coarse, _ = _integrate_interval(rhs, t0, t1, x, n, tableau)
                    fine, _ = _integrate_interval(rhs, t0, t1, x, 2 * n, tableau)
                    err = np.abs(fine - coarse) / 15.0
                    cand = fine
                else:
                    cand, err = _integrate_interval(rhs, t0, t1, x, n, tableau)
            scale = np.maximum(1.0, np.abs(cand))
            ok = ~failed & np.isfinite(cand)
            worst = np.max(err[ok] / scale[ok]) if ok.any() else 0.0
            if worst <= tol or n >= max_substeps:
                break
            n *= 2
        bad = ~np.isfinite(cand) | (positive & (cand <= 0.0))
        failed |= bad
        cand = np.where(failed, np.nan, cand)
        x = np.where(failed, 0.0 if not positive else 1.0, cand)
        out[:, k + 1] = cand
        # let the step grow back when the dynamics calm down
        if n > min_substeps and worst < tol / 64:
            n //= 2
    return ensemble_from_paths(quantizer, grid, out, failed)
