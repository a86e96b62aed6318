"""Densities for mean-translation importance sampling.

Each model exposes the log-density, the score Dp/p and the curvature
D^2p/p, which is all the quantized objective and its derivatives need.
Arrays carry samples along the first axis and coordinates along the last.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit, log_expit


class DensityModel:
    """Interface: subclasses implement ``log_density``, ``score`` and ``curvature``."""

    name = "abstract"
    dim: int

    def log_density(self, x) -> np.ndarray:
        raise NotImplementedError

    def score(self, x) -> np.ndarray:
        raise NotImplementedError

    def curvature(self, x) -> np.ndarray:
        raise NotImplementedError

    def log_ratio(self, x, theta) -> np.ndarray:
        """log p(x) - log p(x - theta)."""
        x = np.asarray(x, dtype=float)
        return self.log_density(x) - self.log_density(x - np.asarray(theta, dtype=float))

    def ratio(self, x, theta) -> np.ndarray:
        return np.exp(self.log_ratio(x, theta))

    def sample(self, u) -> np.ndarray:
        """Map uniforms of shape ``(n, dim)`` to draws from the density."""
        raise NotImplementedError


class Gaussian(DensityModel):
    name = "gaussian"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)
        self._log_norm = -0.5 * self.dim * math.log(2.0 * math.pi)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        return self._log_norm - 0.5 * np.sum(x * x, axis=-1)

    def score(self, x):
        return -np.asarray(x, dtype=float)

    def curvature(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., :, None] * x[..., None, :] - np.eye(self.dim)

    def log_ratio(self, x, theta):
        # |x - theta|^2/2 - |x|^2/2 without forming either square
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return 0.5 * float(theta @ theta) - x @ theta

    def sample(self, u):
        from scipy.special import ndtri

        return ndtri(u)


class Logistic(DensityModel):
    """Standard logistic density e^x / (1 + e^x)^2 on the real line."""

    name = "logistic"
    dim = 1

    def log_density(self, x):
        x = np.asarray(x, dtype=float)[..., 0]
        # log p = log sigmoid(x) + log sigmoid(-x)
        return log_expit(x) + log_expit(-x)

    def score(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - 2.0 * expit(x)

    def curvature(self, x):
        x = np.asarray(x, dtype=float)
        s = 1.0 - 2.0 * expit(x)
        ds = -2.0 * expit(x) * expit(-x)
        return (ds + s * s)[..., None]

    def sample(self, u):
        u = np.asarray(u, dtype=float)
        return np.log(u) - np.log1p(-u)


class HyperExponential(DensityModel):
    """C exp(-|x|^a / s^a) P(x); accepted as a configuration value, not implemented."""

    name = "hyper_exponential"
    dim = 1

    def __init__(self, *args, **kwargs):
        raise NotImplementedError("the hyper-exponential family is not implemented")


def gaussian(d: int) -> Gaussian:
    return Gaussian(d)


def logistic() -> Logistic:
    return Logistic()


def make_density(kind: str, dim: int) -> DensityModel:
    if kind == "gaussian":
        return Gaussian(dim)
    if kind == "logistic":
        if dim != 1:
            raise ValueError("the logistic density is one-dimensional")
        return Logistic()
    if kind == "hyper_exponential":
        return HyperExponential()
    raise ValueError(f"unknown density {kind!r}; expected 'gaussian' or 'logistic'")
