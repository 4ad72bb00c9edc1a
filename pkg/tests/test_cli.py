from __future__ import annotations

import json
import shutil

import numpy as np
import pandas as pd
import pytest

from situational_options import cli, trainer
from situational_options.cli import EXIT_CHECKPOINT, EXIT_CONFIG, EXIT_NON_FINITE, EXIT_OK, main
from situational_options.trainer import GradientEstimate


@pytest.fixture
def bandit_config(config_dir, tmp_path):
    path = tmp_path / "bandit.toml"
    shutil.copy(config_dir / "bandit-sap.toml", path)
    return path


def _train(config, out, *extra: str) -> int:
    return main(["train", str(config), "--out", str(out), "--episodes", "60", *extra])


def test_train_writes_log_checkpoint_and_summary(bandit_config, tmp_path):
    out = tmp_path / "run"
    assert _train(bandit_config, out) == EXIT_OK
    trial = out / "trial-1"
    lines = (trial / "run_log.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 60
    summary = json.loads((trial / "summary.json").read_text(encoding="utf-8"))
    assert summary["environment"] == "bandit"
    assert summary["episodes"] == 60
    assert summary["iterations"] == 6
    assert set(summary["final_metrics"]) >= {"Goals", "Successes", "Episode Length"}
    checkpoint = json.loads((trial / "checkpoint.json").read_text(encoding="utf-8"))
    assert checkpoint["config_hash"] == summary["config_hash"]
    assert checkpoint["k"] == 6


def test_training_is_reproducible_for_a_seed(bandit_config, tmp_path):
    for name in ("a", "b"):
        assert _train(bandit_config, tmp_path / name, "--seed", "7") == EXIT_OK
    first = (tmp_path / "a" / "trial-7" / "run_log.jsonl").read_bytes()
    second = (tmp_path / "b" / "trial-7" / "run_log.jsonl").read_bytes()
    assert first == second
    assert (tmp_path / "a" / "trial-7" / "checkpoint.json").read_bytes() == (
        tmp_path / "b" / "trial-7" / "checkpoint.json"
    ).read_bytes()


def test_resumed_training_continues_where_the_checkpoint_left_off(bandit_config, tmp_path):
    assert _train(bandit_config, tmp_path / "whole") == EXIT_OK
    half = ["train", str(bandit_config), "--episodes", "30"]
    assert main([*half, "--out", str(tmp_path / "first")]) == EXIT_OK
    resume = str(tmp_path / "first" / "trial-1" / "checkpoint.json")
    assert main([*half, "--out", str(tmp_path / "second"), "--resume", resume]) == EXIT_OK
    whole = json.loads((tmp_path / "whole" / "trial-1" / "checkpoint.json").read_text(encoding="utf-8"))
    resumed = json.loads((tmp_path / "second" / "trial-1" / "checkpoint.json").read_text(encoding="utf-8"))
    assert resumed["k"] == whole["k"] == 6
    for key in ("alpha", "omega", "rng_state"):
        assert resumed[key] == whole[key]


def test_resume_refuses_several_trials(bandit_config, tmp_path):
    assert _train(bandit_config, tmp_path / "run") == EXIT_OK
    resume = str(tmp_path / "run" / "trial-1" / "checkpoint.json")
    assert _train(bandit_config, tmp_path / "again", "--trials", "2", "--resume", resume) == EXIT_CONFIG


def test_worker_count_does_not_change_the_log(bandit_config, tmp_path):
    assert _train(bandit_config, tmp_path / "one") == EXIT_OK
    assert _train(bandit_config, tmp_path / "four", "--workers", "4") == EXIT_OK
    assert (tmp_path / "one" / "trial-1" / "run_log.jsonl").read_bytes() == (
        tmp_path / "four" / "trial-1" / "run_log.jsonl"
    ).read_bytes()


def test_eval_writes_metrics_and_trajectories(config_dir, tmp_path):
    config = config_dir / "bpod-sap.toml"
    out = tmp_path / "bpod"
    assert main(["train", str(config), "--out", str(out), "--episodes", "20"]) == EXIT_OK
    checkpoint = out / "trial-1" / "checkpoint.json"
    eval_dir = tmp_path / "eval"
    code = main(
        [
            "eval",
            str(checkpoint),
            str(config),
            "--episodes",
            "10",
            "--out",
            str(eval_dir),
            "--dump-trajectories",
        ]
    )
    assert code == EXIT_OK
    metrics = pd.read_csv(eval_dir / "metrics.csv", index_col="metric")
    assert "Episode Length" in metrics.index
    trajectories = pd.read_csv(eval_dir / "trajectories.csv")
    assert len(trajectories) == pytest.approx(metrics.loc["Episode Length", "mean"] * 10)
    assert trajectories["episode"].nunique() == 10


def test_fixed_baseline_runs_without_learning(config_dir, tmp_path):
    out = tmp_path / "fixed"
    assert main(["train", str(config_dir / "bpod-fixed-options.toml"), "--out", str(out), "--episodes", "25"]) == 0
    summary = json.loads((out / "trial-1" / "summary.json").read_text(encoding="utf-8"))
    assert summary["iterations"] == 0
    assert all(row["mean"] == 0.0 for row in summary["ad_mean_probes"])


def test_export_plot_data_combines_trials(bandit_config, tmp_path):
    out = tmp_path / "run"
    assert _train(bandit_config, out, "--trials", "2") == EXIT_OK
    target = tmp_path / "plot.csv"
    logs = [str(out / "trial-1" / "run_log.jsonl"), str(out / "trial-2" / "run_log.jsonl")]
    assert main(["export-plot-data", *logs, "--out", str(target)]) == EXIT_OK
    frame = pd.read_csv(target)
    assert set(frame["trial"]) == {"trial-1", "trial-2"}
    successes = frame[(frame["trial"] == "trial-1") & (frame["metric"] == "cumulative_successes")]
    assert len(successes) == 60
    assert successes["value"].is_monotonic_increasing
    assert frame["metric"].str.startswith("ad_mean/").any()


def test_validate_config_reports_each_file(config_dir, tmp_path, capsys):
    broken = tmp_path / "broken.toml"
    broken.write_text('name = "broken"\nalgorithm = "sap"\n[env]\nkind = "bandit"\n', encoding="utf-8")
    assert main(["validate-config", str(config_dir / "bandit-sap.toml")]) == EXIT_OK
    assert "ok (sap on bandit" in capsys.readouterr().out
    assert main(["validate-config", str(config_dir / "bandit-sap.toml"), str(broken)]) == EXIT_CONFIG
    assert "zeta is required" in capsys.readouterr().err


def test_train_with_an_invalid_config_exits_with_the_config_code(tmp_path):
    broken = tmp_path / "broken.toml"
    broken.write_text('name = "broken"\nepisodes = -1\n[pg]\nzeta = 1.0\n[env]\nkind = "bandit"\n', encoding="utf-8")
    assert main(["train", str(broken), "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_invalid_episode_override_is_a_config_error(bandit_config, tmp_path):
    assert main(["train", str(bandit_config), "--out", str(tmp_path / "out"), "--episodes", "-5"]) == EXIT_CONFIG


def test_non_finite_gradients_exit_with_their_own_code(bandit_config, tmp_path, monkeypatch):
    def broken(batch, policy, cfg, mode="vanilla", **kwargs):
        return GradientEstimate(
            grad_alpha=np.full(policy.alpha.shape, np.nan),
            grad_omega=np.zeros(policy.omega.shape),
            batch_return_mean=0.0,
            batch_size=len(batch),
        )

    monkeypatch.setattr(trainer, "estimate_gradients", broken)
    assert _train(bandit_config, tmp_path / "nan") == EXIT_NON_FINITE


def test_checkpoint_for_another_environment_is_refused(bandit_config, config_dir, tmp_path):
    out = tmp_path / "run"
    assert _train(bandit_config, out) == EXIT_OK
    code = main(["eval", str(out / "trial-1" / "checkpoint.json"), str(config_dir / "bpod-sap.toml")])
    assert code == EXIT_CHECKPOINT


def test_parser_knows_every_subcommand():
    parser = cli.build_parser()
    for command in ("train", "eval", "export-plot-data", "validate-config"):
        assert command in parser.format_help()
