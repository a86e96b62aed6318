"""Command line front end.

Exit status: 0 on success, 1 on a numerical failure, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import mc_engine
from .config import ConfigError, RunConfig, read_config_file
from .isopt_finite import DegenerateObjectiveError
from .pipeline import Cache, compare, decomposition_for, optimize
from .presets import TABLES, preset_names, resolve_preset
from .quant1d import QuantizerBuildError

log = logging.getLogger("qis")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2


class NumericalFailure(RuntimeError):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with [model], [payoff], [quantization], [basis], [optimizer], [mc] sections")
    common.add_argument("--preset", help="table row such as basket/d2-K50 (config values override it)")
    common.add_argument("--seed", type=int, help="seed for sampling and grid construction")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo (results do not depend on it)")
    common.add_argument("--cache-dir", default=".qis-cache", help="directory for grid and quantizer files")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qis", description="Quantization-based importance sampling for option pricing.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build-grid", parents=[common], help="build a Gaussian quantization grid and write it to the cache")
    sub.add_parser("build-quantizer", parents=[common], help="build a product quantizer of Brownian motion")
    sub.add_parser("optimize", parents=[common], help="minimise the quantized variance objective")
    sub.add_parser("price", parents=[common], help="crude and importance-sampled prices on common draws (CSV)")
    t = sub.add_parser("table", parents=[common], help="run every row of a table preset (CSV)")
    t.add_argument("name", help=f"one of: {', '.join(TABLES)}")
    return p


def _load_config(args) -> RunConfig:
    mapping: dict = {}
    if args.preset:
        try:
            mapping = resolve_preset(args.preset)
        except KeyError:
            raise ConfigError(f"unknown preset {args.preset!r}; valid presets:\n  " + "\n  ".join(preset_names())) from None
    cfg = RunConfig.from_mapping(mapping)
    if args.config:
        cfg.update(read_config_file(args.config))
    if args.seed is not None:
        cfg.update({"mc": {"seed": str(args.seed)}})
    return cfg


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _build_grid(args, cfg: RunConfig, cache: Cache) -> str:
    d = int(cfg.get("model", "d", "1"))
    g = cache.grid(d, cfg.grid_size, cfg.seed, cfg.n_samples, cfg.sweeps)
    return f"grid d={d} N={len(g.weights)} cached in {cache.dir}\n"


def _build_quantizer(args, cfg: RunConfig, cache: Cache) -> str:
    decomposition = decomposition_for(cfg)
    q = cache.quantizer(cfg.T, decomposition)
    return f"quantizer T={cfg.T} decomposition={q.decomposition} size={q.size} distortion2={q.distortion2():.8g}\n"


def _optimize(args, cfg: RunConfig, cache: Cache) -> str:
    opt = optimize(cfg, cache)
    if opt.report is None:
        raise ConfigError("[optimizer] theta is set; nothing to optimise")
    if not opt.report.converged:
        raise NumericalFailure(f"Newton did not converge: {opt.report.message}\n{opt.report.summary()}")
    sys.stderr.write(opt.report.summary() + "\n")
    return opt.theta_csv(cfg.M, cfg.T)


def _price(args, cfg: RunConfig, cache: Cache) -> str:
    opt = optimize(cfg, cache)
    if opt.report is not None and not opt.report.converged:
        raise NumericalFailure(f"Newton did not converge: {opt.report.message}")
    c = compare(cfg, opt, args.threads)
    config_id = args.preset or (args.config and Path(args.config).stem) or "config"
    rows = mc_engine.csv_rows(config_id, [c.crude, c.qis], theta_ref=f"{config_id}:theta")
    return mc_engine.write_csv(rows)


def _table(args, cache: Cache) -> str:
    from .tables import run_table, table_csv

    if args.name not in TABLES:
        raise ConfigError(f"unknown table {args.name!r}; valid tables: {', '.join(TABLES)}")
    overrides = read_config_file(args.config) if args.config else None
    seed = args.seed if args.seed is not None else 1
    rows = run_table(args.name, seed, cache, threads=args.threads, overrides=overrides)
    for r in rows:
        rep = r.optimized.report
        if rep is not None and not rep.converged:
            raise NumericalFailure(f"{args.name}/{r.row_id}: Newton did not converge ({rep.message})")
    return table_csv(args.name, rows)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cache = Cache(args.cache_dir)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "table":
            text = _table(args, cache)
        else:
            cfg = _load_config(args)
            handler = {
                "build-grid": _build_grid,
                "build-quantizer": _build_quantizer,
                "optimize": _optimize,
                "price": _price,
            }[args.command]
            text = handler(args, cfg, cache)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except (NumericalFailure, QuantizerBuildError, DegenerateObjectiveError, FloatingPointError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    _emit(text, args.out)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
