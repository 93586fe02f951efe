"""Harness: config validation, persistence, determinism, CLI exit codes."""

from __future__ import annotations

import json

import pytest

from resamplelab.cli import main
from resamplelab.core import ConfigurationError
from resamplelab.harness import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_THRESHOLD,
    list_experiments,
    run_experiment,
    validate_config,
)


def test_registry_covers_acceptance_surface():
    entries = list_experiments()
    assert len(entries) >= 12
    for e in entries:
        assert e["description"]
        assert e["claim"]


def test_validate_config_rejects_unknown_fields():
    with pytest.raises(ConfigurationError) as err:
        validate_config({"experiment": "star_exact", "bogus": 1})
    assert "bogus" in str(err.value)


def test_validate_config_rejects_unknown_experiment_with_candidates():
    with pytest.raises(ConfigurationError) as err:
        validate_config({"experiment": "nope"})
    assert "candidates" in str(err.value)
    assert "star_exact" in str(err.value)


def test_validate_config_rejects_unknown_params():
    with pytest.raises(ConfigurationError) as err:
        validate_config({"experiment": "balls_bins", "params": {"m": 2}})
    assert "'m'" in str(err.value) or "m" in str(err.value)


def test_reports_are_deterministic_and_serialized(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    r1 = run_experiment("balls_bins", seed=9, trials=3, params={"n": 64},
                        out_dir=str(out1))
    r2 = run_experiment("balls_bins", seed=9, trials=3, params={"n": 64},
                        out_dir=str(out2))
    assert r1.trial_summaries == r2.trial_summaries
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()
    assert (out1 / "trial_0.csv").read_bytes() == (out2 / "trial_0.csv").read_bytes()
    r3 = run_experiment("balls_bins", seed=10, trials=3, params={"n": 64})
    assert r3.trial_summaries != r1.trial_summaries


def test_parallel_equals_serial():
    serial = run_experiment("balls_bins", seed=4, trials=4, params={"n": 64})
    parallel = run_experiment("balls_bins", seed=4, trials=4, params={"n": 64},
                              workers=2)
    assert serial.trial_summaries == parallel.trial_summaries
    assert serial.metrics == parallel.metrics


def test_csv_columns_and_precision(tmp_path):
    run_experiment("landmark_arithmetic", seed=1, params={"t_max": 256, "spot_checks": 3},
                   out_dir=str(tmp_path))
    lines = (tmp_path / "trial_0.csv").read_text().splitlines()
    assert lines[0].startswith("time,")
    assert len(lines) > 1
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["experiment"] == "landmark_arithmetic"
    assert summary["passed"] is True
    assert "seed" in summary and "version" in summary


def test_cli_run_pass_and_artifacts(tmp_path, capsys):
    rc = main(["run", "nested_charging", "--seed", "3", "--out", str(tmp_path),
               "--trials", "1"])
    out = capsys.readouterr().out
    assert rc == EXIT_OK
    assert "[PASS] nested_charging" in out
    assert (tmp_path / "summary.json").exists()


def test_cli_unknown_experiment_exits_one(capsys):
    rc = main(["run", "definitely_not_real"])
    err = capsys.readouterr().err
    assert rc == EXIT_CONFIG
    assert "candidates" in err


def test_cli_malformed_config_exits_one(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    rc = main(["run", "balls_bins", "--config", str(bad)])
    err = capsys.readouterr().err
    assert rc == EXIT_CONFIG
    assert "cannot read config" in err


def test_cli_list(capsys):
    rc = main(["list"])
    out = capsys.readouterr().out
    assert rc == EXIT_OK
    assert "star_exact" in out and "checks:" in out


def test_cli_validate(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"experiment": "star_exact", "seed": 1}))
    assert main(["validate", str(good)]) == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "star_exact", "seed": -3}))
    assert main(["validate", str(bad)]) == EXIT_CONFIG


def test_cli_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "experiment": "balls_bins", "seed": 2, "trials": 2,
        "params": {"n": 64},
    }))
    rc = main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == EXIT_OK
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["trials"] == 2
    assert summary["params"]["n"] == 64


def test_threshold_violation_exit_code(tmp_path):
    # an absurd bound makes the verdict fail without any setting violation
    rc = main(["run", "tree_attack", "--seed", "1", "--trials", "1",
               "--config", str(_write(tmp_path, {
                   "experiment": "tree_attack",
                   "params": {"trials_per_seed": 50, "min_ratio": 100.0},
               }))])
    assert rc == EXIT_THRESHOLD


def _write(tmp_path, doc):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return p
