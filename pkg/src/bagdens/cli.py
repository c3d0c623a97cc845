"""Command line entry point: ``bagdens {mise,agg-curve,bands,curves,selfcheck}``."""

from __future__ import annotations

import argparse
import logging
import sys

from bagdens.errors import BagDensError, ConfigError
from bagdens.harness import build_config, read_config_file, run, write_output

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

_OPTIONS = [
    ("--seed", "unsigned 64-bit master seed (required unless set in the config)"),
    ("--models", "comma-separated model ids (normal, chi10, mix1, claw, triangular, "
                 "uniform01, mix2, mix3)"),
    ("--estimators", "comma-separated estimator ids (hist, fp, kde, baghist, bagfp, "
                     "bagkde, rash)"),
    ("--n", "comma-separated sample sizes"),
    ("--replicates", "Monte Carlo replicates M"),
    ("--ensemble", "ensemble size B, or a list of B for agg-curve"),
    ("--alpha", "band level alpha"),
    ("--kernel", "KDE kernel: gaussian, epanechnikov, rectangular, triangular"),
    ("--bandwidth", "lscv or reference"),
    ("--member-bandwidth", "bootstrap member rule: mixed (default), lscv or reference"),
    ("--evaluation", "weighted (density-weighted, default) or uniform grid averages"),
    ("--grid-points", "evaluation grid size"),
    ("--bands", "comma-separated bands (boot-hist, boot-fp, boot-kde, kde-sm, hist-sm)"),
    ("--threads", "worker threads (default: available cores)"),
    ("--out", "output CSV path (default: stdout)"),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bagdens", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("mise", "agg-curve", "bands", "curves"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file; flags override it")
        for flag, help_text in _OPTIONS:
            p.add_argument(flag, help=help_text)
    sc = sub.add_parser("selfcheck", help="run the invariant suite on small instances")
    sc.add_argument("--seed", type=int, default=20240101)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "selfcheck":
        from bagdens.selfcheck import run_selfcheck
        return EXIT_OK if run_selfcheck(args.seed) else EXIT_NUMERICAL
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "verbose") and v is not None}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(args.command, file_values, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BagDensError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_output(text, cfg.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
