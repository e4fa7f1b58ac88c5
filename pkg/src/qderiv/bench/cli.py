"""``qderiv`` command line: one subcommand per benchmark experiment.

Exit codes: 0 on success, 2 when the reference circuit could not be
calibrated (output is still written), 1 on any error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .csvio import render, write_csv
from .experiments import KINDS, load_config, run

log = logging.getLogger("qderiv")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qderiv", description="Derivative-estimator and optimizer benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="YAML experiment file (defaults apply when omitted)")
        p.add_argument("--seed", type=_u64, help="overrides the seed in the config")
        p.add_argument("--out", help="CSV output path (stdout when omitted)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, args.command, args.seed)
        log.info("running %s (config hash %s)", args.command, cfg.hash())
        result = run(cfg)
        if args.out:
            write_csv(args.out, result.columns, result.rows)
        else:
            sys.stdout.write(render(result.columns, result.rows))
    except (ValueError, OSError, KeyError) as exc:
        print(f"qderiv {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if result.calibration_unmet:
        print("qderiv: reference circuit calibration unmet; results use the default candidate",
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
