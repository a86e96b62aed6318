"""Configuration-driven pipeline: cached quantizers, optimisation of theta, paired pricing."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import mc_engine
from .config import ConfigError, RunConfig
from .funcquant import (
    ProductQuantizer,
    build_brownian_quantizer,
    default_time_grid,
    load_quantizer,
    optimal_decomposition,
    save_quantizer,
)
from .isopt_finite import newton_optimize
from .isopt_path import ThetaPath, build_phi_table, newton_optimize_path
from .models import LocalVol, path_payoff_fn, terminal_payoff_fn
from .newton import NewtonReport
from .quant1d import load_grid_1d, optimal_grid, save_grid_1d
from .quantnd import build_grid_nd, load_grid_nd, save_grid_nd

log = logging.getLogger(__name__)


class Cache:
    """Directory of grid and quantizer files; a missing file is built and written."""

    def __init__(self, directory=".qis-cache"):
        self.dir = Path(directory)

    def _path(self, name: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        return self.dir / name

    def grid(self, d: int, N: int, seed: int, n_samples: int = 1_000_000, sweeps: int = 30):
        if d == 1:
            path = self._path(f"grid_1d_N{N}.txt")
            if path.exists():
                return load_grid_1d(path)
            log.warning("no cached grid at %s; building it", path)
            g = optimal_grid(N)
            save_grid_1d(g, path)
            return g
        path = self._path(f"grid_d{d}_N{N}_seed{seed}_n{n_samples}_sweeps{sweeps}.txt")
        if path.exists():
            return load_grid_nd(path)
        log.warning("no cached grid at %s; building it", path)
        g = build_grid_nd(d, N, n_samples=n_samples, seed=seed, sweeps=sweeps)
        save_grid_nd(g, path)
        return load_grid_nd(path)

    def quantizer(self, T: float, decomposition) -> ProductQuantizer:
        tag = "-".join(str(n) for n in decomposition)
        path = self._path(f"kl_T{T!r}_{tag}.txt")
        if path.exists():
            return load_quantizer(path)
        log.warning("no cached quantizer at %s; building it", path)
        q = build_brownian_quantizer(T, decomposition)
        save_quantizer(q, path)
        return load_quantizer(path)


def route(model, payoff) -> str:
    return "finite" if payoff.terminal and not isinstance(model, LocalVol) else "path"


@dataclass
class Optimized:
    theta: object  # ndarray or ThetaPath
    report: NewtonReport | None
    route: str
    excluded_paths: int = 0

    def theta_csv(self, M: int, T: float) -> str:
        if isinstance(self.theta, ThetaPath):
            return self.theta.to_csv(default_time_grid(T, M))
        return "theta\n" + "".join(f"{v:.17g}\n" for v in np.atleast_1d(self.theta))


def decomposition_for(cfg: RunConfig):
    return cfg.decomposition or optimal_decomposition(cfg.budget)


def optimize(cfg: RunConfig, cache: Cache) -> Optimized:
    model, payoff = cfg.model(), cfg.payoff()
    which = route(model, payoff)
    fixed = cfg.fixed_theta
    if which == "finite":
        if fixed is not None:
            return Optimized(np.asarray(fixed, dtype=float), None, which)
        density = cfg.density(model.dim)
        if density.name != "gaussian":
            raise ConfigError("the asset models are driven by Gaussian noise; use density = gaussian")
        grid = cache.grid(model.dim, cfg.grid_size, cfg.seed, cfg.n_samples, cfg.sweeps)
        rep = newton_optimize(grid, terminal_payoff_fn(model, payoff), density, tol=cfg.tol, max_iter=cfg.max_iter)
        return Optimized(rep.theta_hat, rep, which)
    basis = cfg.basis()
    if fixed is not None:
        if len(fixed) == 1:
            fixed = fixed * basis.m
        if len(fixed) != basis.m:
            raise ConfigError(f"theta has {len(fixed)} coefficients, basis has {basis.m}")
        return Optimized(ThetaPath(basis, np.asarray(fixed, dtype=float)), None, which)
    bq = cache.quantizer(cfg.T, decomposition_for(cfg))
    grid = default_time_grid(cfg.T, cfg.M)
    if isinstance(model, LocalVol):
        ens = model.quantized_ensemble(bq, grid, method=cfg.ode_method)
    else:
        ens = model.quantized_ensemble(bq, grid)
    table = build_phi_table(ens, basis, path_payoff_fn(model, payoff, grid))
    rep = newton_optimize_path(table, tol=cfg.tol, max_iter=cfg.max_iter)
    return Optimized(ThetaPath(basis, rep.theta_hat), rep, which, table.excluded)


def compare(cfg: RunConfig, opt: Optimized, threads: int = 1) -> mc_engine.Comparison:
    return mc_engine.compare(cfg.model(), cfg.payoff(), opt.theta, cfg.n, cfg.seed, M=cfg.M, threads=threads)
