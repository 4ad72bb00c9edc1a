"""Learning results at desk scale. Slow: run with ``pytest -m slow``."""

from __future__ import annotations

import math
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from situational_options.config import build_experiment, load_experiment
from situational_options.envs import OptionBandit, probe_ad_means
from situational_options.metrics import trial_metrics
from situational_options.models import PgSmdpConfig
from situational_options.oracle import common_random_numbers, finite_diff_grad
from situational_options.rollout import rollout
from situational_options.trainer import er_train, estimate_gradients, evaluate_policy, sap_train

pytestmark = pytest.mark.slow

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
SEEDS = (1, 2, 3)


@lru_cache(maxsize=None)
def _trained(config_name: str, seed: int):
    experiment = build_experiment(load_experiment(CONFIG_DIR / config_name))
    config = experiment.config
    rng = np.random.default_rng(seed)
    if config.algorithm == "fixed":
        policy = experiment.policy
    else:
        train = sap_train if config.algorithm == "sap" else er_train
        policy = train(
            experiment.env, experiment.policy, config.schedule, experiment.pg, config.episodes, rng, settings=config.trainer
        ).policy
    records, _ = evaluate_policy(
        experiment.env,
        policy,
        experiment.pg,
        config.eval_episodes,
        np.random.default_rng(10_000 + seed),
        greedy=config.greedy_eval,
    )
    return experiment, policy, trial_metrics(records, window=config.eval_episodes)


def _mean(config_name: str, metric: str) -> float:
    return float(np.mean([_trained(config_name, seed)[2][metric] for seed in SEEDS]))


def test_batch_gradient_matches_common_random_number_differences(rng):
    env = OptionBandit()
    cfg = PgSmdpConfig(zeta=1.0, horizon=1)
    template = env.initial_policy()
    policy = template.with_params(rng.normal(scale=0.5, size=(2, 2)), rng.normal(scale=0.2, size=(2, 2)))
    samples = 100_000
    draws = np.empty((samples, 8))
    for index in range(samples):
        estimate = estimate_gradients([rollout(env, policy, cfg, rng)], policy, cfg)
        draws[index] = np.concatenate([estimate.grad_alpha.ravel(), estimate.grad_omega.ravel()])

    def smoothed(params: np.ndarray, stream: np.random.Generator) -> float:
        candidate = template.with_params(params[:4], params[4:])
        return env.smoothed_objective(candidate, stream.integers(0, 2, size=samples), stream.standard_normal(samples))

    params = np.concatenate([policy.alpha.ravel(), policy.omega.ravel()])
    numeric = finite_diff_grad(common_random_numbers(smoothed, seed=99), params, epsilon=1e-4)
    standard_error = draws.std(axis=0, ddof=1) / math.sqrt(samples)
    # The finite difference carries its own Monte-Carlo error; both are O(1/sqrt(n)).
    assert np.all(np.abs(draws.mean(axis=0) - numeric) <= 4 * math.sqrt(2) * standard_error + 1e-3)


def test_awareness_parameters_steer_around_the_pit():
    sap_goals = _mean("bpod-sap.toml", "Goals")
    fixed_goals = _mean("bpod-fixed-options.toml", "Goals")
    assert sap_goals > fixed_goals
    assert sap_goals >= 5 * fixed_goals
    assert _mean("bpod-sap.toml", "Avg Reward") > _mean("bpod-fixed-options.toml", "Avg Reward")


def test_awareness_means_brake_near_the_start_and_not_past_the_wall():
    passing = 0
    for seed in SEEDS:
        experiment, policy, _ = _trained("bpod-sap.toml", seed)
        table = probe_ad_means(policy, experiment.env.probe_states(), experiment.option_names)
        means = table.set_index(["probe", "option"])["mean"]
        at_x = means[("X", "up-right")]
        at_y = means[("Y", "down-right")]
        passing += int(at_x < 0 and at_x < at_y)
    assert passing >= 2


def test_winning_striker_wastes_time_instead_of_scoring():
    winning, losing = "striker-winning-sap.toml", "striker-losing-sap.toml"
    assert _mean(winning, "Episode Length") >= 1.5 * _mean(losing, "Episode Length")
    assert _mean(winning, "Goals") < _mean(losing, "Goals")
    assert _mean(winning, "Captures") < _mean(losing, "Captures")


def test_losing_striker_escapes_the_dribbling_optimum_only_with_sap():
    zeta = _trained("striker-losing-sap.toml", SEEDS[0])[0].pg.zeta
    er_stuck = sum(
        _trained("striker-losing-er.toml", seed)[2]["Goals"] < 10
        and _trained("striker-losing-er.toml", seed)[2]["Avg Reward"] < zeta
        for seed in SEEDS
    )
    sap_scores = sum(
        _trained("striker-losing-sap.toml", seed)[2]["Goals"] > 30
        and _trained("striker-losing-sap.toml", seed)[2]["Avg Reward"] > zeta
        for seed in SEEDS
    )
    assert er_stuck >= 2
    assert sap_scores >= 2
