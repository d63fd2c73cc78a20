"""Command-line entry point: run sweeps, validate configs, draw plots."""

from __future__ import annotations

import argparse
import sys

from . import config as config_mod
from . import plots, sweep


def _cmd_run(args) -> int:
    cfg = config_mod.parse_config(args.config)
    agg_path, run_dirs = sweep.run_sweep(cfg)
    print(f"wrote {len(run_dirs)} run directories")
    print(f"aggregate: {agg_path}")
    return 0


def _cmd_validate(args) -> int:
    config_mod.parse_config(args.config)
    print(f"{args.config}: OK")
    return 0


def _cmd_plot(args) -> int:
    path = plots.plot(args.csv, args.kind, args.out_dir, snr_db=args.snr)
    print(f"wrote {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fedhda",
        description="Hybrid digital-analog federated parameter-transmission simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the sweep described by a config file")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="parse and validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_plot = sub.add_parser("plot", help="render plots from aggregate CSVs")
    p_plot.add_argument("kind", choices=plots.PLOT_KINDS)
    p_plot.add_argument("csv", nargs="+")
    p_plot.add_argument("-o", "--out-dir", default=".")
    p_plot.add_argument("--snr", type=float, default=None,
                        help="SNR slice for rounds/budget curves (default: highest)")
    p_plot.set_defaults(func=_cmd_plot)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (config_mod.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
