"""Run configuration: flat ``key = value`` sections, validated against a fixed schema.

Key names follow the symbols of the option tables (r, T, S0, sigma, K, L,
hR, C, beta, lambda, alpha, p, M). Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .basis import make_basis
from .density import make_density
from .models import Asian, Basket, BlackScholes, DownInCall, LocalVol, SchwartzOU, SparkSpread


class ConfigError(ValueError):
    """Invalid or incomplete configuration (exit status 2)."""


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in str(text).replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"expected numbers, got {text!r}") from exc


def _ints(text: str) -> tuple:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


SCHEMA = {
    "model": {"kind", "d", "r", "S0", "sigma", "lambda", "alpha", "beta"},
    "payoff": {"kind", "T", "K", "weights", "hR", "C", "p", "L", "discount"},
    "quantization": {"N", "d_N", "decomposition", "n_samples", "sweeps", "method"},
    "basis": {"kind", "m"},
    "optimizer": {"tol", "max_iter", "density", "theta"},
    "mc": {"n", "M", "seed"},
}

DEFAULTS = {
    "quantization": {"N": "200", "d_N": "966", "n_samples": "1000000", "sweeps": "30", "method": "rk4"},
    "basis": {"kind": "constant", "m": "1"},
    "optimizer": {"tol": "1e-8", "max_iter": "50", "density": "gaussian"},
    "mc": {"n": "100000", "M": "100", "seed": "1"},
}


@dataclass
class RunConfig:
    sections: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        cfg = cls({s: dict(v) for s, v in DEFAULTS.items()})
        cfg.update(mapping)
        return cfg

    def update(self, mapping: dict) -> None:
        for section, values in mapping.items():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]; expected one of {sorted(SCHEMA)}")
            unknown = set(values) - SCHEMA[section]
            if unknown:
                raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{section}]; allowed: {sorted(SCHEMA[section])}")
            self.sections.setdefault(section, {}).update({k: str(v) for k, v in values.items()})

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> str:
        v = self.get(section, key)
        if v is None:
            raise ConfigError(f"missing [{section}] {key}")
        return v

    # typed accessors ----------------------------------------------------

    @property
    def seed(self) -> int:
        return _ints(self.require("mc", "seed"))[0]

    @property
    def n(self) -> int:
        n = _ints(self.require("mc", "n"))[0]
        if n < 2:
            raise ConfigError("[mc] n must be at least 2")
        return n

    @property
    def M(self) -> int:
        M = _ints(self.require("mc", "M"))[0]
        if M < 1:
            raise ConfigError("[mc] M must be positive")
        return M

    @property
    def T(self) -> float:
        return _floats(self.require("payoff", "T"))[0]

    @property
    def tol(self) -> float:
        return _floats(self.require("optimizer", "tol"))[0]

    @property
    def max_iter(self) -> int:
        return _ints(self.require("optimizer", "max_iter"))[0]

    @property
    def grid_size(self) -> int:
        return _ints(self.require("quantization", "N"))[0]

    @property
    def n_samples(self) -> int:
        return _ints(self.require("quantization", "n_samples"))[0]

    @property
    def sweeps(self) -> int:
        return _ints(self.require("quantization", "sweeps"))[0]

    @property
    def ode_method(self) -> str:
        return self.require("quantization", "method")

    @property
    def budget(self) -> int:
        return _ints(self.require("quantization", "d_N"))[0]

    @property
    def decomposition(self):
        v = self.get("quantization", "decomposition")
        return _ints(v) if v else None

    @property
    def fixed_theta(self):
        v = self.get("optimizer", "theta")
        return _floats(v) if v is not None else None

    def model(self):
        try:
            return _build_model(self)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def payoff(self):
        try:
            return _build_payoff(self)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def basis(self):
        try:
            return make_basis(self.require("basis", "kind"), _ints(self.require("basis", "m"))[0], self.T)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def density(self, dim: int):
        try:
            return make_density(self.require("optimizer", "density"), dim)
        except NotImplementedError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _dim(cfg: RunConfig) -> int:
    v = cfg.get("model", "d")
    return _ints(v)[0] if v else 1


def _build_model(cfg: RunConfig):
    kind = cfg.require("model", "kind")
    d = _dim(cfg)
    if kind == "black_scholes":
        return BlackScholes(_floats(cfg.require("model", "r"))[0], _floats(cfg.require("model", "sigma")), _floats(cfg.require("model", "S0")), dim=d)
    if kind == "schwartz_ou":
        s0 = _floats(cfg.require("model", "S0"))
        alpha = cfg.get("model", "alpha")
        alpha = _floats(alpha) if alpha else tuple(math.log(v) for v in s0)
        r = _floats(cfg.get("model", "r", "0"))[0]
        return SchwartzOU(_floats(cfg.require("model", "lambda")), alpha, _floats(cfg.require("model", "sigma")), s0, r=r, dim=d)
    if kind == "local_vol":
        if d != 1:
            raise ConfigError("the local volatility model is one-dimensional")
        return LocalVol(
            _floats(cfg.require("model", "r"))[0],
            _floats(cfg.require("model", "sigma"))[0],
            _floats(cfg.require("model", "beta"))[0],
            _floats(cfg.require("model", "S0"))[0],
        )
    raise ConfigError(f"unknown model kind {kind!r}; expected black_scholes, schwartz_ou or local_vol")


def _build_payoff(cfg: RunConfig):
    kind = cfg.require("payoff", "kind")
    T = cfg.T
    discount = _bool(cfg.get("payoff", "discount", "true"))
    if kind == "basket":
        d = _dim(cfg)
        w = cfg.get("payoff", "weights")
        weights = _floats(w) if w else (1.0 / d,) * d
        if len(weights) != d:
            raise ConfigError(f"basket needs {d} weights, got {len(weights)}")
        return Basket(weights, _floats(cfg.require("payoff", "K"))[0], T, discount)
    if kind == "spark_spread":
        return SparkSpread(_floats(cfg.require("payoff", "hR"))[0], _floats(cfg.require("payoff", "C"))[0], T, discount)
    if kind == "asian":
        return Asian(_floats(cfg.require("payoff", "K"))[0], _ints(cfg.require("payoff", "p"))[0], T, discount)
    if kind == "down_in_call":
        return DownInCall(_floats(cfg.require("payoff", "K"))[0], _floats(cfg.require("payoff", "L"))[0], T, discount)
    raise ConfigError(f"unknown payoff kind {kind!r}; expected basket, spark_spread, asian or down_in_call")


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str  # keys are case sensitive (S0, hR, ...)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return {s: dict(parser.items(s)) for s in parser.sections()}
