from __future__ import annotations

import numpy as np
import pytest

from situational_options.envs import OptionBandit
from situational_options.errors import OutcomeTreeTooLargeError
from situational_options.oracle import (
    TabularPolicy,
    TinyMdp,
    common_random_numbers,
    discretize_gaussian_ad,
    enumerate_pg_values,
    finite_diff_grad,
    policy_grid_argmax,
    random_tabular_policy,
    random_tiny_mdp,
)


def _uniform_policy(n_states: int, n_options: int, n_ap: int) -> TabularPolicy:
    return TabularPolicy(
        option_probs=np.full((n_states, n_options), 1.0 / n_options),
        ap_probs=np.full((n_states, n_options, n_ap), 1.0 / n_ap),
    )


def test_deterministic_chain_always_reaches_the_threshold():
    transitions = np.zeros((2, 1, 1, 2))
    transitions[:, 0, 0, 1] = 1.0
    mdp = TinyMdp(start=np.array([1.0, 0.0]), transitions=transitions, rewards=np.ones((2, 1, 1, 2)))
    values = enumerate_pg_values(mdp, _uniform_policy(2, 1, 1), zeta=2.0, horizon=2)
    assert values.success_probability == 1.0
    assert values.augmented_return == 1.0


def test_coin_flips_need_two_heads():
    transitions = np.full((2, 2, 1, 2), 0.5)
    rewards = np.zeros((2, 2, 1, 2))
    rewards[..., 1] = 1.0
    mdp = TinyMdp(start=np.array([1.0, 0.0]), transitions=transitions, rewards=rewards)
    values = enumerate_pg_values(mdp, _uniform_policy(2, 2, 1), zeta=2.0, horizon=2)
    assert values.success_probability == pytest.approx(0.25, abs=1e-15)
    assert values.augmented_return == pytest.approx(0.25, abs=1e-15)


def test_success_probability_equals_augmented_return_on_random_instances(rng):
    for _ in range(50):
        mdp = random_tiny_mdp(rng)
        policy = random_tabular_policy(rng, mdp.n_states, mdp.n_options, mdp.n_ap)
        zeta = float(rng.integers(0, 3))
        horizon = int(rng.integers(1, 4))
        values = enumerate_pg_values(mdp, policy, zeta, horizon)
        assert values.gap <= 1e-12
        assert 0.0 <= values.success_probability <= 1.0 + 1e-12


def test_both_objectives_pick_the_same_grid_policy(rng):
    mdp = random_tiny_mdp(rng, n_states=2, n_options=2, n_ap=3)
    grid = [random_tabular_policy(rng, 2, 2, 3) for _ in range(30)]
    best_success, best_augmented = policy_grid_argmax(mdp, grid, zeta=2.0, horizon=3)
    assert best_success == best_augmented


def test_enumeration_refuses_oversized_trees(rng):
    mdp = random_tiny_mdp(rng)
    policy = random_tabular_policy(rng, mdp.n_states, mdp.n_options, mdp.n_ap)
    with pytest.raises(OutcomeTreeTooLargeError):
        enumerate_pg_values(mdp, policy, 1.0, horizon=9)
    wide = random_tiny_mdp(rng, n_states=10, n_options=4, n_ap=5)
    with pytest.raises(OutcomeTreeTooLargeError):
        enumerate_pg_values(wide, random_tabular_policy(rng, 10, 4, 5), 1.0, horizon=3)


def test_tiny_mdp_validates_its_rows():
    with pytest.raises(ValueError):
        TinyMdp(start=np.array([1.0]), transitions=np.full((1, 1, 1, 1), 0.5), rewards=np.zeros((1, 1, 1, 1)))


def test_discretized_ad_is_a_distribution():
    values, probabilities = discretize_gaussian_ad(0.0, 0.0004, (-0.05, 0.05), n_bins=5)
    np.testing.assert_allclose(values, [-0.05, -0.025, 0.0, 0.025, 0.05])
    assert probabilities.sum() == pytest.approx(1.0)
    assert probabilities[2] == probabilities.max()
    assert probabilities[0] == pytest.approx(probabilities[-1])


def test_finite_differences_of_a_quadratic():
    grad = finite_diff_grad(lambda x: float(np.sum(x**2)), np.array([1.0, 2.0]))
    np.testing.assert_allclose(grad, [2.0, 4.0], atol=1e-8)


def test_finite_differences_need_a_positive_step():
    with pytest.raises(ValueError):
        finite_diff_grad(lambda x: 0.0, np.zeros(2), epsilon=0.0)


def test_common_random_numbers_replay_the_stream():
    objective = common_random_numbers(lambda params, rng: float(params @ rng.standard_normal(2)), seed=7)
    params = np.array([0.5, -1.0])
    assert objective(params) == objective(params)


def test_bandit_gradient_matches_finite_differences(rng):
    env = OptionBandit()
    template = env.initial_policy()
    policy = template.with_params(rng.normal(scale=0.5, size=(2, 2)), rng.normal(scale=0.2, size=(2, 2)))
    split = policy.alpha.size
    samples = 100_000

    def estimate(params: np.ndarray, stream: np.random.Generator) -> float:
        candidate = template.with_params(params[:split], params[split:])
        return env.smoothed_objective(
            candidate, stream.integers(0, 2, size=samples), stream.standard_normal(samples)
        )

    params = np.concatenate([policy.alpha.ravel(), policy.omega.ravel()])
    numeric = finite_diff_grad(common_random_numbers(estimate, seed=2024), params, epsilon=1e-4)
    exact_alpha, exact_omega = env.exact_gradient(policy)
    np.testing.assert_allclose(numeric[:split], exact_alpha.ravel(), atol=0.01)
    np.testing.assert_allclose(numeric[split:], exact_omega.ravel(), atol=0.01)
