"""Experiment runner: config validation, seeding, persistence, verdicts.

A run is governed by one root seed; trial k draws its own derived seed, so
trials are independent and the set of results is the same whether they run
serially or across workers.  Every trial writes ``trial_<k>.csv`` (fixed
column order, floats at 17 significant digits) and the run writes
``summary.json`` with per-metric aggregates and the experiment's verdict.

Exit code contract: 0 pass, 1 config/usage error, 2 verdict threshold
violation, 3 setting-rule violation during simulation.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import jsonschema

from . import __version__
from .core import ConfigurationError, derive_seed
from .experiments import REGISTRY, get_experiment

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "experiment": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "workers": {"type": "integer", "minimum": 1},
        "out_dir": {"type": "string"},
        "params": {"type": "object"},
    },
}

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_THRESHOLD = 2
EXIT_SETTING_RULE = 3


def validate_config(doc: dict) -> dict:
    """Schema-validate a config document; raises with a field path."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        path = "$" + "".join(f".{p}" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path)
        raise ConfigurationError(f"config invalid at {path}: {err.message}") from err
    name = doc["experiment"]
    if name not in REGISTRY:
        known = ", ".join(sorted(REGISTRY))
        raise ConfigurationError(f"unknown experiment {name!r}; candidates: {known}")
    exp = REGISTRY[name]
    params = dict(doc.get("params", {}))
    unknown = sorted(set(params) - set(exp.defaults))
    if unknown:
        raise ConfigurationError(
            f"unknown params for {name!r}: {unknown}; allowed: {sorted(exp.defaults)}"
        )
    return doc


@dataclass
class ExperimentReport:
    experiment: str
    seed: int
    trials: int
    params: dict
    passed: bool
    detail: str
    trial_summaries: list
    metrics: dict
    out_dir: str | None
    version: str = __version__

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "version": self.version,
            "seed": self.seed,
            "trials": self.trials,
            "params": self.params,
            "passed": self.passed,
            "detail": self.detail,
            "metrics": self.metrics,
            "trial_summaries": self.trial_summaries,
        }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_trial_csv(path: str, rows: list) -> None:
    cols = ["time"] + sorted({k for row in rows for k in row} - {"time"})
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c, "")) for c in cols) + "\n")


def _aggregate(trial_summaries: list) -> dict:
    metrics: dict = {}
    numeric_keys = [
        k for k in trial_summaries[0]
        if all(isinstance(s.get(k), (int, float)) and not isinstance(s.get(k), bool)
               for s in trial_summaries)
    ]
    for k in numeric_keys:
        vals = sorted(float(s[k]) for s in trial_summaries)
        n = len(vals)
        metrics[k] = {
            "mean": sum(vals) / n,
            "min": vals[0],
            "max": vals[-1],
            "p50": vals[n // 2],
            "p90": vals[min(n - 1, math.ceil(0.9 * n) - 1)],
        }
    return metrics


def _run_trial(args):
    name, params, trial_seed = args
    exp = get_experiment(name)
    return exp.runner(params, trial_seed)


def run_experiment(name: str, seed: int = 0, trials: int | None = None,
                   params: dict | None = None, out_dir: str | None = None,
                   workers: int = 1) -> ExperimentReport:
    """Run an experiment's trials, persist artifacts, and return the report."""
    exp = get_experiment(name)
    merged = dict(exp.defaults)
    merged.update(params or {})
    unknown = sorted(set(merged) - set(exp.defaults))
    if unknown:
        raise ConfigurationError(f"unknown params for {name!r}: {unknown}")
    n_trials = trials if trials is not None else exp.trials
    trial_seeds = [derive_seed(seed, "trial", k) for k in range(n_trials)]
    jobs = [(name, merged, s) for s in trial_seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs))
    else:
        results = [_run_trial(j) for j in jobs]

    trial_summaries = [summary for _, summary in results]
    passed, detail = exp.verdict(trial_summaries, merged)
    report = ExperimentReport(
        experiment=name, seed=seed, trials=n_trials, params=merged,
        passed=passed, detail=detail, trial_summaries=trial_summaries,
        metrics=_aggregate(trial_summaries), out_dir=out_dir,
    )
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        for k, (rows, _) in enumerate(results):
            _write_trial_csv(os.path.join(out_dir, f"trial_{k}.csv"), rows)
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def run_from_config(doc: dict) -> ExperimentReport:
    validate_config(doc)
    return run_experiment(
        doc["experiment"],
        seed=doc.get("seed", 0),
        trials=doc.get("trials"),
        params=doc.get("params"),
        out_dir=doc.get("out_dir"),
        workers=doc.get("workers", 1),
    )


def list_experiments() -> list[dict]:
    """Registry listing: name, description, and the claim each run checks."""
    return [
        {"name": exp.name, "description": exp.description, "claim": exp.claim,
         "default_trials": exp.trials}
        for exp in sorted(REGISTRY.values(), key=lambda e: e.name)
    ]
