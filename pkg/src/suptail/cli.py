"""Command line entry point: ``suptail run <scenario-file> [--seed N] [--workers N] [--out DIR]``."""
from __future__ import annotations

import argparse
import sys

from .report import run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suptail",
        description="Exact and Monte Carlo experiments on suprema of empirical sums.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("scenario", help="path to a JSON scenario")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--workers", type=int, default=1, help="Monte Carlo worker threads")
    run.add_argument("--out", default="results", help="output directory for CSV/JSON")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return 2
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return 2
    return run_scenario(args.scenario, args.seed, args.workers, args.out)


if __name__ == "__main__":
    sys.exit(main())
