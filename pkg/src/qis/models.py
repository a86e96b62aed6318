"""Asset models and payoffs.

Models work in two settings: a terminal map from a standard Gaussian vector
to asset prices (finite-dimensional importance sampling) and a scalar
diffusion ``dX = b(X) dt + sigma(X) dW`` with an observation map from the
state to the asset price (path-dependent importance sampling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcquant import (
    ProductQuantizer,
    QuantizedEnsemble,
    bs_exponential_paths,
    build_ou_quantizer,
    ensemble_from_paths,
    quantize_diffusion,
)


def _vec(v, d=None):
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if d is not None and a.size == 1 and d > 1:
        a = np.full(d, float(a[0]))
    return a


class BlackScholes:
    """Independent geometric Brownian motions S^i = S^i_0 exp((r - s_i^2/2) t + s_i W^i_t)."""

    kind = "black_scholes"
    positive = True

    def __init__(self, r: float, sigma, s0, dim: int | None = None):
        d = dim or max(np.size(sigma), np.size(s0))
        self.r = float(r)
        self.sigma = _vec(sigma, d)
        self.s0 = _vec(s0, d)
        if self.sigma.shape != self.s0.shape:
            raise ValueError("sigma and s0 must have one entry per asset")
        if np.any(self.sigma <= 0) or np.any(self.s0 <= 0):
            raise ValueError("volatilities and initial prices must be positive")
        self.dim = self.sigma.size

    def gaussian_to_terminal(self, z, T: float) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.s0 * np.exp((self.r - 0.5 * self.sigma**2) * T + self.sigma * math.sqrt(T) * z)

    # scalar diffusion view (dim == 1)
    @property
    def x0(self) -> float:
        self._require_scalar()
        return float(self.s0[0])

    def drift(self, x):
        return self.r * x

    def vol(self, x):
        return self.sigma[0] * x

    def vol_prime(self, x):
        return self.sigma[0] + 0.0 * x

    def observe(self, t, x):
        return x

    def asset_vol(self, s):
        return self.sigma[0] * s

    def quantized_ensemble(self, quantizer: ProductQuantizer, time_grid) -> QuantizedEnsemble:
        self._require_scalar()
        return bs_exponential_paths(quantizer, self.r, float(self.sigma[0]), float(self.s0[0]), time_grid)

    def _require_scalar(self):
        if self.dim != 1:
            raise ValueError("path simulation needs a single asset")


class SchwartzOU:
    """Exponential OU spot prices: log S^j is OU with speed theta_j, level mu_j = alpha_j - sigma_j^2/(2 theta_j).

    The path state is the centred OU part Y (dY = -theta Y dt + sigma dW,
    Y_0 = 0) and S_t = exp(log S_0 e^{-theta t} + mu (1 - e^{-theta t}) + Y_t).
    ``r`` is only used for discounting.
    """

    kind = "schwartz_ou"
    positive = False

    def __init__(self, theta, alpha, sigma, s0, r: float = 0.0, dim: int | None = None):
        d = dim or max(np.size(theta), np.size(alpha), np.size(sigma), np.size(s0))
        self.theta = _vec(theta, d)
        self.alpha = _vec(alpha, d)
        self.sigma = _vec(sigma, d)
        self.s0 = _vec(s0, d)
        self.r = float(r)
        if not (self.theta.shape == self.alpha.shape == self.sigma.shape == self.s0.shape):
            raise ValueError("parameters must have one entry per asset")
        if np.any(self.theta <= 0) or np.any(self.sigma < 0) or np.any(self.s0 <= 0):
            raise ValueError("mean reversion and initial price must be positive, volatility non-negative")
        self.dim = self.theta.size
        self.mu = self.alpha - self.sigma**2 / (2.0 * self.theta)

    def _mean_log(self, t):
        decay = np.exp(-self.theta * t)
        return np.log(self.s0) * decay + self.mu * (1.0 - decay)

    def gaussian_to_terminal(self, z, T: float) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        sd = self.sigma * np.sqrt((1.0 - np.exp(-2.0 * self.theta * T)) / (2.0 * self.theta))
        return np.exp(self._mean_log(T) + sd * z)

    @property
    def x0(self) -> float:
        self._require_scalar()
        return 0.0

    def drift(self, y):
        return -self.theta[0] * y

    def vol(self, y):
        return self.sigma[0] + 0.0 * y

    def vol_prime(self, y):
        return 0.0 * y

    def observe(self, t, y):
        t = np.asarray(t, dtype=float)
        decay = np.exp(-self.theta[0] * t)
        return np.exp(math.log(self.s0[0]) * decay + self.mu[0] * (1.0 - decay) + y)

    def asset_vol(self, s):
        return self.sigma[0] * s

    def quantized_ensemble(self, quantizer: ProductQuantizer, time_grid) -> QuantizedEnsemble:
        self._require_scalar()
        t = np.asarray(time_grid, dtype=float)
        oq = build_ou_quantizer(quantizer.T, float(self.theta[0]), float(self.sigma[0]), quantizer.decomposition)
        return ensemble_from_paths(oq, t, self.observe(t, oq.paths(t)))

    def _require_scalar(self):
        if self.dim != 1:
            raise ValueError("path simulation needs a single asset")


class LocalVol:
    """dX = r X dt + sigma X^{1+beta} / sqrt(1 + X^2) dW."""

    kind = "local_vol"
    positive = True
    dim = 1

    def __init__(self, r: float, sigma: float, beta: float, x0: float):
        if sigma <= 0 or x0 <= 0:
            raise ValueError("sigma and x0 must be positive")
        self.r = float(r)
        self.sigma = float(sigma)
        self.beta = float(beta)
        self._x0 = float(x0)

    @property
    def x0(self) -> float:
        return self._x0

    def drift(self, x):
        return self.r * x

    def vol(self, x):
        return self.sigma * np.power(x, 1.0 + self.beta) / np.sqrt(1.0 + x * x)

    def vol_prime(self, x):
        root = np.sqrt(1.0 + x * x)
        return self.sigma * ((1.0 + self.beta) * np.power(x, self.beta) / root - np.power(x, 2.0 + self.beta) / root**3)

    def observe(self, t, x):
        return x

    def asset_vol(self, s):
        return self.vol(s)

    def gaussian_to_terminal(self, z, T: float):
        raise ValueError("the local volatility model has no exact terminal map; simulate paths instead")

    def quantized_ensemble(self, quantizer: ProductQuantizer, time_grid, method: str = "rk4") -> QuantizedEnsemble:
        return quantize_diffusion(self.drift, self.vol, self.vol_prime, self._x0, quantizer, time_grid, method=method, positive=True)


# Payoffs ------------------------------------------------------------------


@dataclass(frozen=True)
class Basket:
    weights: tuple
    strike: float
    maturity: float
    discount: bool = True
    kind = "basket"
    terminal = True

    def __call__(self, S):
        S = np.atleast_2d(S)
        if S.shape[-1] != len(self.weights):
            raise ValueError(f"basket expects {len(self.weights)} assets, got {S.shape[-1]}")
        return np.maximum(S @ np.asarray(self.weights, dtype=float) - self.strike, 0.0)


@dataclass(frozen=True)
class SparkSpread:
    heat_rate: float
    cost: float
    maturity: float
    discount: bool = True
    kind = "spark_spread"
    terminal = True

    def __call__(self, S):
        S = np.atleast_2d(S)
        if S.shape[-1] != 2:
            raise ValueError("spark spread expects (electricity, gas) prices")
        return np.maximum(S[:, 0] - self.heat_rate * S[:, 1] - self.cost, 0.0)


@dataclass(frozen=True)
class Asian:
    """Arithmetic average over dates t_k = k T / p, k = 0..p-1."""

    strike: float
    p: int
    maturity: float
    discount: bool = True
    kind = "asian"
    terminal = False

    def observation_indices(self, M: int) -> np.ndarray:
        if M % self.p:
            raise ValueError(f"{self.p} observation dates do not fall on a grid of {M} steps")
        return np.arange(self.p) * (M // self.p)

    def __call__(self, paths, time_grid, asset_vol=None):
        paths = np.atleast_2d(paths)
        M = paths.shape[1] - 1
        if len(time_grid) != M + 1:
            raise ValueError("path length does not match the time grid")
        avg = paths[:, self.observation_indices(M)].mean(axis=1)
        return np.maximum(avg - self.strike, 0.0)


@dataclass(frozen=True)
class DownInCall:
    """(X_T - K)_+ 1{min X <= L}, smoothed by Brownian-bridge survival between grid points."""

    strike: float
    barrier: float
    maturity: float
    discount: bool = True
    kind = "down_in_call"
    terminal = False

    def __call__(self, paths, time_grid, asset_vol):
        paths = np.atleast_2d(paths)
        grid = np.asarray(time_grid, dtype=float)
        if paths.shape[1] != len(grid):
            raise ValueError("path length does not match the time grid")
        return dic_smoothed_payoff(paths, grid, self.strike, self.barrier, asset_vol)


def bridge_survival(x_k, x_k1, L: float, dt: float, sigma_k):
    """P(no crossing of L between two grid points | endpoints) for a Brownian segment.

    A zero local volatility makes the segment deterministic: survival is 1
    when both endpoints lie strictly above L and 0 otherwise.
    """
    x_k = np.asarray(x_k, dtype=float)
    x_k1 = np.asarray(x_k1, dtype=float)
    sigma_k = np.asarray(sigma_k, dtype=float)
    dt = np.asarray(dt, dtype=float)
    if np.any(dt <= 0):
        raise ValueError("dt must be positive")
    above = L <= np.minimum(x_k, x_k1)
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = -2.0 * (L - x_k) * (L - x_k1) / (dt * sigma_k * sigma_k)
        p = np.where(above, -np.expm1(expo), 0.0)
    flat = sigma_k == 0.0
    if np.any(flat):
        p = np.where(flat, ((x_k > L) & (x_k1 > L)).astype(float), p)
    return p


def dic_smoothed_payoff(paths, time_grid, K: float, L: float, asset_vol, r: float = 0.0) -> np.ndarray:
    """e^{-rT} (X_T - K)_+ (1 - prod_k p(X_{t_k}, X_{t_{k+1}})) on paths sampled at ``time_grid``."""
    paths = np.atleast_2d(paths)
    grid = np.asarray(time_grid, dtype=float)
    dt = np.diff(grid)
    surv = np.ones(paths.shape[0])
    call = np.maximum(paths[:, -1] - K, 0.0)
    live = call > 0.0
    if live.any():
        left = paths[live, :-1]
        surv[live] = np.prod(bridge_survival(left, paths[live, 1:], L, dt, asset_vol(left)), axis=1)
    return math.exp(-r * grid[-1]) * call * (1.0 - surv)


def discount_factor(payoff, r: float) -> float:
    return math.exp(-r * payoff.maturity) if payoff.discount else 1.0


def payoff_eval(payoff, state, r: float, time_grid=None, asset_vol=None) -> np.ndarray:
    """Discounted payoff of terminal asset prices ``(n, d)`` or asset paths ``(n, M+1)``."""
    df = discount_factor(payoff, r)
    if payoff.terminal:
        return df * payoff(state)
    if time_grid is None:
        raise ValueError(f"{payoff.kind} payoff needs the time grid")
    return df * payoff(state, time_grid, asset_vol)


def terminal_payoff_fn(model, payoff):
    """Gaussian points ``(n, d)`` -> discounted payoff values."""
    if not payoff.terminal:
        raise ValueError(f"{payoff.kind} is path dependent")
    df = discount_factor(payoff, model.r)

    def f(z):
        return df * payoff(model.gaussian_to_terminal(z, payoff.maturity))

    return f


def path_payoff_fn(model, payoff, time_grid):
    """Asset paths ``(n, M+1)`` -> discounted payoff values (terminal payoffs use the last column)."""
    df = discount_factor(payoff, model.r)
    grid = np.asarray(time_grid, dtype=float)

    def f(paths):
        if payoff.terminal:
            return df * payoff(paths[:, -1:])
        return df * payoff(paths, grid, model.asset_vol)

    return f
