"""Command line interface: ``blockpick {select,oracle,experiment,mse-curve}``.

Exit codes: 0 success, 1 other errors, 2 configuration / input errors,
3 degenerate estimates or aborted experiments.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from .exceptions import BlockpickError, ConfigError, DegenerateEstimateError, ExperimentAborted, ModelError
from .experiment import config_from_dict, emit_report, load_config, oracle_for, run_experiment
from .hhj import HhjConfig, block_grid, hhj_select, subsample_mse_curve
from .mbb import mbb_variance
from .nppi import NppiConfig, nppi_select
from .pw import PwConfig, pw_select
from .series import load_csv
from .statistic import STATISTIC_NAMES, builtin_statistic

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3


def _add_hhj_options(p):
    p.add_argument("--m", type=int, help="subsample length (default ceil(n^1/2))")
    p.add_argument("--pilot", type=int, help="pilot block length (default ceil(n^1/3))")
    p.add_argument("--K", type=float, default=4.0, help="grid constant (default 4)")
    p.add_argument("--stride", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockpick", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="choose a block length for one series", allow_abbrev=False)
    p.add_argument("--method", choices=("hhj", "nppi", "pw"), required=True)
    p.add_argument("--input", required=True, help="CSV file, one observation per line, no header")
    p.add_argument("--statistic", choices=STATISTIC_NAMES, default="mean")
    p.add_argument("--boot-budget", type=int, default=500, help="Monte Carlo resamples for non-mean statistics")
    p.add_argument("--seed", type=int, default=0)
    _add_hhj_options(p)
    p.add_argument("--ell1", type=int)
    p.add_argument("--ell2", type=int)
    p.add_argument("--m-jab", type=int, dest="m_jab")
    p.add_argument("--M", type=int, dest="M")
    p.add_argument("--tau", type=float, default=0.2)

    p = sub.add_parser("oracle", help="build or refresh the Monte Carlo oracle cache", allow_abbrev=False)
    p.add_argument("--config", help="experiment config; uses its model, statistic, n_grid and oracle section")
    p.add_argument("--model", help='model as JSON, e.g. \'{"kind":"ar1","phi":0.5,"sigma":1.0}\'')
    p.add_argument("--statistic", choices=STATISTIC_NAMES, default="mean")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--R", type=int, default=5000)
    p.add_argument("--K", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache-dir", default="oracle_cache")
    p.add_argument("--parallelism", type=int, default=1)

    p = sub.add_parser("experiment", help="run a convergence-rate experiment", allow_abbrev=False)
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="report")
    p.add_argument("--formats", default="csv,json,gnuplot")
    p.add_argument("--parallelism", type=int, help="override the config's worker count")

    p = sub.add_parser("mse-curve", help="empirical or oracle subsampling MSE curve as CSV", allow_abbrev=False)
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=("empirical", "oracle"), default="empirical")
    p.add_argument("--statistic", choices=STATISTIC_NAMES, default="mean")
    p.add_argument("--sigma-inf-sq", type=float, help="centre for the oracle curve")
    p.add_argument("--boot-budget", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="write CSV here instead of standard output")
    _add_hhj_options(p)
    return parser


def _hhj_config(args, n: int) -> HhjConfig:
    base = HhjConfig.default(n)
    return HhjConfig(
        m=args.m or base.m,
        pilot_block=args.pilot or base.pilot_block,
        K=args.K,
        boot_budget=getattr(args, "boot_budget", 500),
        stride=args.stride,
    )


def cmd_select(args) -> int:
    x = load_csv(args.input)
    n = x.shape[0]
    H = builtin_statistic(args.statistic)
    if args.method == "hhj":
        sel = hhj_select(x, H, _hhj_config(args, n), args.seed)
    elif args.method == "nppi":
        base = NppiConfig.default(n)
        cfg = NppiConfig(
            ell1=args.ell1 or base.ell1,
            ell2=args.ell2 or base.ell2,
            m_jab=args.m_jab or base.m_jab,
            boot_budget=args.boot_budget,
        )
        sel = nppi_select(x, H, cfg, args.seed)
    else:
        sel = pw_select(x, H, PwConfig(M=args.M, tau=args.tau))
    json.dump(sel.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if args.parallelism > 1:
            cfg.parallelism = args.parallelism
    else:
        if not args.model or not args.n:
            raise ConfigError("oracle needs --config or both --model and --n")
        try:
            model = json.loads(args.model)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--model: {exc}") from None
        cfg = config_from_dict({
            "model": model,
            "statistic": args.statistic,
            "methods": ["pw"],
            "n_grid": sorted(args.n),
            "replications": 10,
            "master_seed": args.seed,
            "parallelism": args.parallelism,
            "oracle": {"R": args.R, "K": args.K, "cache_dir": args.cache_dir},
            "tuning": {"pw": {"M": 1}},
        })
    out = []
    for n in cfg.n_grid:
        res = oracle_for(cfg, n)
        out.append({"n": n, "ell_opt": res.ell_opt, "ell0": res.ell0, "R": res.replications})
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.parallelism:
        cfg.parallelism = args.parallelism
    report = run_experiment(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = {"csv": ".csv", "json": ".json", "gnuplot": ".gp"}
    for fmt in args.formats.split(","):
        fmt = fmt.strip()
        if fmt not in suffix:
            raise ConfigError(f"unknown report format {fmt!r}")
        path = emit_report(report, fmt, out_dir / (args.prefix + suffix[fmt]))
        print(path)
    return EXIT_OK


def cmd_mse_curve(args) -> int:
    x = load_csv(args.input)
    n = x.shape[0]
    H = builtin_statistic(args.statistic)
    cfg = _hhj_config(args, n)
    if args.kind == "oracle":
        if args.sigma_inf_sq is None:
            raise ConfigError("--kind oracle needs --sigma-inf-sq")
        center = args.sigma_inf_sq
    else:
        center = mbb_variance(x, cfg.pilot_block, H, args.boot_budget, args.seed).value
    curve = subsample_mse_curve(x, cfg.m, block_grid(cfg.m, cfg.K), center, H, args.boot_budget,
                                args.seed, cfg.stride, args.kind)
    lines = ["b,mse"] + [f"{b},{curve.entries[b]!r}" for b in curve.block_lengths]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"select": cmd_select, "oracle": cmd_oracle, "experiment": cmd_experiment, "mse-curve": cmd_mse_curve}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ModelError) as exc:
        print(f"blockpick: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateEstimateError, ExperimentAborted) as exc:
        print(f"blockpick: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (BlockpickError, ValueError, OSError) as exc:
        print(f"blockpick: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
