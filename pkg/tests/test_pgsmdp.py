from __future__ import annotations

import math

import numpy as np
import pytest

from situational_options.envs import BottomlessPit, StrikerEnv
from situational_options.models import (
    AugmentedState,
    AwarenessTrajectory,
    EnvState,
    PgSmdpConfig,
    TransitionRecord,
)
from situational_options.pgsmdp import (
    augment_transition,
    initial_state,
    pg_reward,
    success_probability_estimate,
)
from situational_options.rollout import OUT_OF_TIME, rollout

S = EnvState((0.0, 0.0))


def _make_trajectory(rewards: list[float], cfg: PgSmdpConfig) -> AwarenessTrajectory:
    z = initial_state(S)
    steps = []
    for index, reward in enumerate(rewards):
        z_next = augment_transition(z, reward, S, horizon=cfg.horizon)
        terminal = index == len(rewards) - 1
        steps.append(
            TransitionRecord(
                z=z,
                option_id=0,
                ap=0.0,
                base_reward=reward,
                pg_reward=pg_reward(z_next, cfg, terminal=terminal),
                z_next=z_next,
                terminal=terminal,
            )
        )
        z = z_next
    return AwarenessTrajectory(tuple(steps))


def test_augment_transition_adds_reward_and_advances_time():
    z = AugmentedState(S, eta=3.0, t=4)
    s_next = EnvState((1.0, 2.0))
    z_next = augment_transition(z, 2.0, s_next)
    assert z_next == AugmentedState(s_next, eta=5.0, t=5)


def test_augment_transition_zero_reward():
    z_next = augment_transition(initial_state(S), 0.0, S)
    assert z_next.eta == 0.0
    assert z_next.t == 1


def test_chain_of_unit_rewards_accumulates_exactly():
    z = initial_state(S)
    for _ in range(150):
        z = augment_transition(z, 1.0, S)
    assert z.eta == 150.0
    assert z.t == 150


def test_augment_transition_rejects_bad_inputs():
    with pytest.raises(ValueError):
        augment_transition(initial_state(S), math.nan, S)
    with pytest.raises(ValueError):
        augment_transition(initial_state(S), math.inf, S)
    with pytest.raises(ValueError):
        augment_transition(AugmentedState(S, t=10), 1.0, S, horizon=10)


@pytest.mark.parametrize(
    ("t", "eta", "expected"),
    [(50, 99.0, 0.0), (150, 0.5, 0.0), (150, 1.0, 1.0), (150, 7.0, 1.0)],
)
def test_pg_reward_indicator(t, eta, expected):
    cfg = PgSmdpConfig(zeta=1.0, horizon=150)
    assert pg_reward(AugmentedState(S, eta=eta, t=t), cfg) == expected


def test_pg_reward_scores_early_termination_immediately():
    cfg = PgSmdpConfig(zeta=1.0, horizon=150)
    assert pg_reward(AugmentedState(S, eta=6.0, t=12), cfg, terminal=True) == 1.0
    assert pg_reward(AugmentedState(S, eta=0.2, t=12), cfg, terminal=True) == 0.0


def test_pg_reward_rejects_states_past_horizon():
    with pytest.raises(ValueError):
        pg_reward(AugmentedState(S, eta=1.0, t=151), PgSmdpConfig(zeta=1.0, horizon=150))


def test_pg_reward_is_monotone_in_eta():
    cfg = PgSmdpConfig(zeta=0.3, horizon=5)
    etas = np.linspace(-1.0, 1.0, 41)
    values = [pg_reward(AugmentedState(S, eta=float(eta), t=5), cfg) for eta in etas]
    assert values == sorted(values)


def test_config_validation():
    with pytest.raises(ValueError):
        PgSmdpConfig(zeta=1.0, horizon=0)
    with pytest.raises(ValueError):
        PgSmdpConfig(zeta=1.0, horizon=5, gamma=1.5)
    with pytest.raises(ValueError):
        PgSmdpConfig(zeta=math.inf, horizon=5)


def test_transition_record_enforces_bookkeeping():
    z = initial_state(S)
    with pytest.raises(ValueError):
        TransitionRecord(z, 0, 0.0, 1.0, 0.0, AugmentedState(S, eta=2.0, t=1), False)
    with pytest.raises(ValueError):
        TransitionRecord(z, 0, 0.0, 1.0, 0.0, AugmentedState(S, eta=1.0, t=2), False)


def test_terminal_flag_only_on_final_record():
    cfg = PgSmdpConfig(zeta=1.0, horizon=5)
    good = _make_trajectory([1.0, 1.0], cfg)
    with pytest.raises(ValueError):
        AwarenessTrajectory((good.steps[1], good.steps[1]))


def test_success_probability_counts_threshold_crossings():
    cfg = PgSmdpConfig(zeta=2.0, horizon=3)
    trajectories = [_make_trajectory([1.0, 1.0, 0.0], cfg) for _ in range(7)]
    trajectories += [_make_trajectory([1.0, 0.0, 0.0], cfg) for _ in range(3)]
    assert success_probability_estimate(trajectories, cfg) == pytest.approx(0.7)
    mean_pg = sum(trajectory.total_pg_reward for trajectory in trajectories) / len(trajectories)
    assert mean_pg == success_probability_estimate(trajectories, cfg)


def test_success_probability_all_below_threshold():
    cfg = PgSmdpConfig(zeta=5.0, horizon=2)
    assert success_probability_estimate([_make_trajectory([1.0, 1.0], cfg)] * 4, cfg) == 0.0


def test_success_probability_rejects_empty_batch():
    with pytest.raises(ValueError):
        success_probability_estimate([], PgSmdpConfig(zeta=1.0, horizon=2))


@pytest.mark.parametrize("env_factory", [BottomlessPit, StrikerEnv])
def test_random_rollouts_satisfy_indicator_identity(env_factory, rng):
    env = env_factory()
    cfg = PgSmdpConfig(zeta=env.config.zeta, horizon=env.horizon)
    policy = env.initial_policy()
    trajectories = [rollout(env, policy, cfg, rng) for _ in range(40)]
    for trajectory in trajectories:
        assert trajectory.total_pg_reward in (0.0, 1.0)
        assert trajectory.total_pg_reward == float(trajectory.total_base_reward >= cfg.zeta)
        assert trajectory.final_state.eta == trajectory.total_base_reward
        assert trajectory.length <= cfg.horizon
        assert trajectory.steps[-1].terminal
        assert trajectory.event is not None
    success_probability_estimate(trajectories, cfg)


def test_rollout_marks_out_of_time(rng):
    env = StrikerEnv()
    cfg = PgSmdpConfig(zeta=1.0, horizon=env.horizon)
    policy = env.initial_policy()
    # A policy that only ever moves to the ball never ends the episode early.
    alpha = np.zeros_like(policy.alpha)
    alpha[0, 0] = 40.0
    trajectory = rollout(env, policy.with_params(alpha, policy.omega), cfg, rng)
    assert trajectory.length == 150
    assert trajectory.event == OUT_OF_TIME
