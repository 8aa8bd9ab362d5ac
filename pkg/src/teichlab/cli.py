"""Command-line front end.

    teich-lab run <config.json> [--out DIR] [--seed S] [--threads N]
    teich-lab list

Exit codes: 0 success, 2 configuration error, 3 numerical-budget error
(unfolding budget exceeded or unstable quadrature).  A JSON summary of the
run is printed to stdout.  The environment variable TEICH_LAB_BUDGET bounds
the unfolding node budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BudgetExceeded, ConfigError, QuadratureUnstable
from .experiments import list_experiments, run_experiment


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="teich-lab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment from a JSON config")
    run_p.add_argument("config", type=Path)
    run_p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--threads", type=int, default=1)
    sub.add_parser("list", help="print the experiment catalogue")
    args = parser.parse_args(argv)

    if args.command == "list":
        print(json.dumps(list_experiments(), indent=2))
        return 0

    try:
        config = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        summary = run_experiment(config, args.out, seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        print(json.dumps(list_experiments(), indent=2), file=sys.stderr)
        return 2
    except (BudgetExceeded, QuadratureUnstable) as exc:
        print(f"numerical budget error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(summary, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
