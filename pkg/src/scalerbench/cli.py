"""Command-line entry point.

Subcommands: ``run <config>`` executes one experiment, ``compare <config>``
evaluates every configured scaler under identical conditions, ``validate
<config>`` prints the fully-defaulted config or the complete error list.
Exit codes: 0 success, 2 validation error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import validate_config
from .errors import ConfigError, StageError
from .experiment import run_comparison, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scalerbench",
        description="Simulation-backed evaluation testbed for microservice "
                    "auto-scalers")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("run", "execute one experiment"),
                        ("compare", "evaluate all configured scalers")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--output-dir", help="override the config's output_dir")
        p.add_argument("--seed", type=int, help="override the config's seed")

    v = sub.add_parser("validate", help="check a config and echo the defaults")
    v.add_argument("config", help="experiment config (JSON)")
    v.add_argument("--mode", choices=("run", "compare"), default="run")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {"output_dir": getattr(args, "output_dir", None),
                 "seed": getattr(args, "seed", None)}

    if args.command == "validate":
        try:
            _, normalized = validate_config(args.config, mode=args.mode)
        except ConfigError as exc:
            for e in exc.errors:
                print(f"error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        print(json.dumps(normalized, sort_keys=True, indent=2))
        return EXIT_OK

    mode = "compare" if args.command == "compare" else "run"
    try:
        cfg, _ = validate_config(args.config, mode=mode, overrides=overrides)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "run":
        try:
            result = run_experiment(cfg)
        except StageError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_STAGE
        rep = result.report
        print(f"run complete: {result.out_dir}")
        print(f"  scaler={rep['scaler_id']} svr={rep['svr']:.4f} "
              f"sr={rep['sr']:.4f} cpu={rep['cpu_total_core_seconds']:.1f} "
              f"core-s mem={rep['memory_total_mb_seconds']:.0f} MB-s")
        return EXIT_OK

    outcome = run_comparison(cfg)
    for row in outcome["rows"]:
        rep = row["report"]
        if rep is None:
            print(f"  {row['label']}: FAILED ({row['error']})")
        else:
            print(f"  {row['label']}: svr={rep['svr']:.4f} sr={rep['sr']:.4f} "
                  f"cpu={rep['cpu_total_core_seconds']:.1f}")
    print(f"comparison written to {outcome['out_dir']}")
    if outcome["succeeded"] == 0:
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
