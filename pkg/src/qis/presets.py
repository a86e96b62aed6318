"""Configurations of the seven option tables.

Each table is a base configuration plus one override per row. Single rows
are addressable as presets named ``<table>/<row>``, e.g. ``basket/d2-K50``
or ``asian-bs/haar-8``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

PATH_ROWS = (
    ("constant", 1),
    ("shifted_legendre", 2),
    ("shifted_legendre", 4),
    ("shifted_legendre", 8),
    ("karhunen_loeve", 2),
    ("karhunen_loeve", 4),
    ("karhunen_loeve", 8),
    ("haar", 2),
    ("haar", 4),
    ("haar", 8),
)

BASIS_LABEL = {"constant": "Constant", "shifted_legendre": "Legendre", "karhunen_loeve": "KL", "haar": "Haar"}


@dataclass(frozen=True)
class TablePreset:
    name: str
    kind: str  # "finite" or "path"
    base: dict
    rows: tuple  # ((row id, overrides, leading csv cells), ...)
    header: tuple

    def row_config(self, row_id: str) -> dict:
        for rid, override, _ in self.rows:
            if rid == row_id:
                return merge(self.base, override)
        raise KeyError(row_id)


def merge(base: dict, override: dict) -> dict:
    out = {s: dict(v) for s, v in base.items()}
    for s, v in override.items():
        out.setdefault(s, {}).update(v)
    return out


def _path_rows():
    return tuple(
        (f"{kind}-{m}", {"basis": {"kind": kind, "m": str(m)}}, (BASIS_LABEL[kind], m)) for kind, m in PATH_ROWS
    )


PATH_HEADER = ("basis", "m", "price_mc", "variance_mc", "price_qis", "variance_qis")


def _basket():
    rows = []
    for d in range(2, 7):
        for K in (50, 55, 60):
            rows.append(
                (
                    f"d{d}-K{K}",
                    {"model": {"d": str(d)}, "payoff": {"K": str(K)}},
                    (d, K),
                )
            )
    base = {
        "model": {"kind": "black_scholes", "r": "0.05", "S0": "50", "sigma": "0.3"},
        "payoff": {"kind": "basket", "T": "1"},
        "quantization": {"N": "200"},
        "mc": {"n": "100000"},
    }
    return TablePreset("basket", "finite", base, tuple(rows), ("d", "K", "price_mc", "variance_mc", "price_qis", "variance_qis"))


def _spark():
    base = {
        "model": {
            "kind": "schwartz_ou",
            "d": "2",
            "S0": "40 4",
            "sigma": "0.7 0.35",
            "lambda": "0.3 0.3",
            "alpha": f"{math.log(40.0)!r} {math.log(4.0)!r}",
            "r": "0",
        },
        "payoff": {"kind": "spark_spread", "T": "0.5", "hR": "10"},
        "quantization": {"N": "200"},
        "mc": {"n": "100000"},
    }
    rows = tuple((f"C{C}", {"payoff": {"C": str(C)}}, (C,)) for C in (0, 3, 5, 8, 10, 12))
    return TablePreset("spark", "finite", base, rows, ("C", "price_mc", "variance_mc", "price_qis", "variance_qis"))


def _path_table(name, model, payoff, n):
    base = {
        "model": model,
        "payoff": payoff,
        "quantization": {"d_N": "966"},
        "mc": {"n": str(n), "M": "100"},
    }
    return TablePreset(name, "path", base, _path_rows(), PATH_HEADER)


_ASIAN = {"kind": "asian", "T": "1", "K": "115", "p": "100", "discount": "false"}
_DIC = {"kind": "down_in_call", "T": "1", "K": "115", "L": "65"}
_LV = {"kind": "local_vol", "r": "0.04", "sigma": "5", "beta": "0.5", "S0": "100"}
_BS = {"kind": "black_scholes", "r": "0.04", "sigma": "0.5", "S0": "100"}

TABLES = {
    t.name: t
    for t in (
        _basket(),
        _spark(),
        _path_table("asian-bs", _BS, _ASIAN, 100_000),
        _path_table("asian-lv", _LV, _ASIAN, 50_000),
        _path_table(
            "asian-schwartz",
            {"kind": "schwartz_ou", "r": "0.04", "sigma": "0.5", "S0": "100", "lambda": "0.3", "alpha": repr(math.log(100.0))},
            _ASIAN,
            100_000,
        ),
        _path_table("dic-lv", _LV, _DIC, 50_000),
        _path_table("dic-bs", _BS, _DIC, 100_000),
    )
}


def preset_names() -> list[str]:
    return [f"{t.name}/{rid}" for t in TABLES.values() for rid, _, _ in t.rows]


def resolve_preset(name: str) -> dict:
    table, _, row = name.partition("/")
    if table not in TABLES or not row:
        raise KeyError(name)
    return TABLES[table].row_config(row)
