"""Quantization-based importance sampling for Monte Carlo option pricing."""

from .basis import make_basis
from .density import gaussian, logistic
from .funcquant import build_brownian_quantizer, build_ou_quantizer, optimal_decomposition
from .isopt_finite import newton_optimize
from .isopt_path import ThetaPath, build_phi_table, newton_optimize_path
from .mc_engine import MCResult, compare, price_crude, price_is_finite, price_is_path
from .models import Asian, Basket, BlackScholes, DownInCall, LocalVol, SchwartzOU, SparkSpread, path_payoff_fn, terminal_payoff_fn
from .pipeline import Cache
from .quant1d import build_grid_1d, optimal_grid
from .quantnd import build_grid_nd, nearest_cell

__version__ = "0.1.0"

__all__ = [
    "Asian",
    "Basket",
    "BlackScholes",
    "Cache",
    "DownInCall",
    "LocalVol",
    "SchwartzOU",
    "SparkSpread",
    "gaussian",
    "logistic",
    "make_basis",
    "optimal_grid",
    "path_payoff_fn",
    "terminal_payoff_fn",
    "MCResult",
    "ThetaPath",
    "build_brownian_quantizer",
    "build_grid_1d",
    "build_grid_nd",
    "build_ou_quantizer",
    "build_phi_table",
    "compare",
    "nearest_cell",
    "newton_optimize",
    "newton_optimize_path",
    "optimal_decomposition",
    "price_crude",
    "price_is_finite",
    "price_is_path",
]
