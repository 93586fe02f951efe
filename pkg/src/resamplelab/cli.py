"""Command-line entry point: run, list, and validate experiments."""

from __future__ import annotations

import argparse
import json
import sys

from .core import ConfigurationError, SettingRuleError
from .harness import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_SETTING_RULE,
    EXIT_THRESHOLD,
    list_experiments,
    run_from_config,
    validate_config,
)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def cmd_run(args) -> int:
    try:
        doc = _load_json(args.config) if args.config else {}
    except (OSError, json.JSONDecodeError) as err:
        print(f"error: cannot read config {args.config}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.experiment:
        doc["experiment"] = args.experiment
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.out is not None:
        doc["out_dir"] = args.out
    if args.workers is not None:
        doc["workers"] = args.workers
    try:
        validate_config(doc)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_from_config(doc)
    except SettingRuleError as err:
        print(f"setting rule violated: {err}", file=sys.stderr)
        return EXIT_SETTING_RULE
    status = "PASS" if report.passed else "FAIL"
    print(f"[{status}] {report.experiment}: {report.detail}")
    if report.out_dir:
        print(f"artifacts: {report.out_dir}/summary.json, trial_<k>.csv")
    return EXIT_OK if report.passed else EXIT_THRESHOLD


def cmd_list(_args) -> int:
    entries = list_experiments()
    width = max(len(e["name"]) for e in entries)
    for e in entries:
        print(f"{e['name']:<{width}}  {e['description']}")
        print(f"{'':<{width}}  checks: {e['claim']} (default trials: {e['default_trials']})")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        validate_config(_load_json(args.config))
    except (ConfigurationError, OSError, json.JSONDecodeError) as err:
        print(f"invalid: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print("ok")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="resamplelab",
        description="Seeded experiments on resampling schedulers under adaptive adversaries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("experiment", nargs="?", help="experiment name (see `list`)")
    p_run.add_argument("--config", help="JSON config file")
    p_run.add_argument("--seed", type=int, help="root seed (one seed governs a run)")
    p_run.add_argument("--trials", type=int, help="trial count override")
    p_run.add_argument("--out", help="output directory for CSV and summary")
    p_run.add_argument("--workers", type=int, help="parallel trial workers")
    p_run.set_defaults(fn=cmd_run)

    p_list = sub.add_parser("list", help="list registered experiments")
    p_list.set_defaults(fn=cmd_list)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(fn=cmd_validate)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
