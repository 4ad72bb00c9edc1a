"""Exact and finite-difference oracles for verifying the PG-SMDP construction and the gradients.

Everything here works on tiny, fully enumerable problems: a handful of
states and options, a discretized AP and a short horizon.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.stats import norm

from .errors import OutcomeTreeTooLargeError

logger = logging.getLogger(__name__)

MAX_HORIZON = 8
MAX_LEAVES = 1_000_000
DEFAULT_AP_BINS = 5


@dataclass(frozen=True)
class TinyMdp:
    """Finite MDP whose reward is a deterministic function of (s, o, ap, s').

    ``transitions[s, o, a, s']`` and ``rewards[s, o, a, s']`` are indexed by
    state, option, AP bin and next state.
    """

    start: np.ndarray
    transitions: np.ndarray
    rewards: np.ndarray

    def __post_init__(self) -> None:
        start = np.asarray(self.start, dtype=float)
        transitions = np.asarray(self.transitions, dtype=float)
        rewards = np.asarray(self.rewards, dtype=float)
        if transitions.ndim != 4 or transitions.shape != rewards.shape:
            raise ValueError("transitions and rewards must share a (S, O, A, S) shape")
        n_states = transitions.shape[0]
        if transitions.shape[3] != n_states or start.shape != (n_states,):
            raise ValueError("start distribution and next-state axis must cover every state")
        if not np.allclose(transitions.sum(axis=3), 1.0) or not np.isclose(start.sum(), 1.0):
            raise ValueError("transition rows and the start distribution must sum to 1")
        if not np.all(np.isfinite(rewards)):
            raise ValueError("rewards must be finite")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "rewards", rewards)

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_options(self) -> int:
        return self.transitions.shape[1]

    @property
    def n_ap(self) -> int:
        return self.transitions.shape[2]


@dataclass(frozen=True)
class TabularPolicy:
    """Markov two-tiered policy: option_probs[s, o] and ap_probs[s, o, a]."""

    option_probs: np.ndarray
    ap_probs: np.ndarray

    def __post_init__(self) -> None:
        option_probs = np.asarray(self.option_probs, dtype=float)
        ap_probs = np.asarray(self.ap_probs, dtype=float)
        if ap_probs.shape[:2] != option_probs.shape:
            raise ValueError("ap_probs must be indexed by (state, option, ap)")
        if not (np.allclose(option_probs.sum(axis=1), 1.0) and np.allclose(ap_probs.sum(axis=2), 1.0)):
            raise ValueError("policy rows must sum to 1")
        object.__setattr__(self, "option_probs", option_probs)
        object.__setattr__(self, "ap_probs", ap_probs)

    def step_probs(self, s: int) -> np.ndarray:
        """Joint probability of (option, ap) in state s."""

        return self.option_probs[s][:, None] * self.ap_probs[s]


@dataclass(frozen=True)
class PgValues:
    success_probability: float
    augmented_return: float

    @property
    def gap(self) -> float:
        return abs(self.success_probability - self.augmented_return)


def _check_size(mdp: TinyMdp, horizon: int) -> None:
    if horizon < 1 or horizon > MAX_HORIZON:
        raise OutcomeTreeTooLargeError(f"horizon must lie in [1, {MAX_HORIZON}], got {horizon}")
    leaves = float(mdp.n_options * mdp.n_ap * mdp.n_states) ** horizon
    if leaves > MAX_LEAVES:
        raise OutcomeTreeTooLargeError(
            f"outcome tree has {leaves:.3g} leaves; the limit is {MAX_LEAVES}"
        )


def success_probability(mdp: TinyMdp, policy: TabularPolicy, zeta: float, horizon: int) -> float:
    """P(sum of rewards over the horizon >= zeta) by forward propagation of (s, eta) mass."""

    _check_size(mdp, horizon)
    frontier: dict[tuple[int, float], float] = {}
    for s in range(mdp.n_states):
        if mdp.start[s] > 0:
            frontier[(s, 0.0)] = frontier.get((s, 0.0), 0.0) + float(mdp.start[s])
    for _ in range(horizon):
        advanced: dict[tuple[int, float], float] = {}
        for (s, eta), mass in frontier.items():
            joint = policy.step_probs(s)
            for o in range(mdp.n_options):
                for a in range(mdp.n_ap):
                    if joint[o, a] == 0:
                        continue
                    for s_next in range(mdp.n_states):
                        p = mdp.transitions[s, o, a, s_next]
                        if p == 0:
                            continue
                        key = (s_next, eta + float(mdp.rewards[s, o, a, s_next]))
                        advanced[key] = advanced.get(key, 0.0) + mass * joint[o, a] * p
        frontier = advanced
    return float(sum(mass for (_, eta), mass in frontier.items() if eta >= zeta))


def augmented_return(mdp: TinyMdp, policy: TabularPolicy, zeta: float, horizon: int) -> float:
    """E[sum of indicator rewards] by backward Bellman recursion over z = (s, eta, t)."""

    _check_size(mdp, horizon)

    @lru_cache(maxsize=None)
    def value(s: int, eta: float, t: int) -> float:
        if t == horizon:
            return 0.0
        joint = policy.step_probs(s)
        total = 0.0
        for o in range(mdp.n_options):
            for a in range(mdp.n_ap):
                if joint[o, a] == 0:
                    continue
                for s_next in range(mdp.n_states):
                    p = mdp.transitions[s, o, a, s_next]
                    if p == 0:
                        continue
                    eta_next = eta + float(mdp.rewards[s, o, a, s_next])
                    reward = 1.0 if t + 1 == horizon and eta_next >= zeta else 0.0
                    total += joint[o, a] * p * (reward + value(s_next, eta_next, t + 1))
        return total

    return float(sum(mdp.start[s] * value(s, 0.0, 0) for s in range(mdp.n_states) if mdp.start[s] > 0))


def enumerate_pg_values(mdp: TinyMdp, policy: TabularPolicy, zeta: float, horizon: int) -> PgValues:
    """Exact success probability and exact augmented return, which must coincide."""

    values = PgValues(
        success_probability=success_probability(mdp, policy, zeta, horizon),
        augmented_return=augmented_return(mdp, policy, zeta, horizon),
    )
    logger.debug("Enumerated PG values %s", values)
    return values


def random_tiny_mdp(
    rng: np.random.Generator, n_states: int = 3, n_options: int = 2, n_ap: int = DEFAULT_AP_BINS
) -> TinyMdp:
    shape = (n_states, n_options, n_ap)
    return TinyMdp(
        start=rng.dirichlet(np.ones(n_states)),
        transitions=rng.dirichlet(np.ones(n_states), size=shape),
        rewards=rng.integers(-1, 3, size=shape + (n_states,)).astype(float),
    )


def random_tabular_policy(rng: np.random.Generator, n_states: int, n_options: int, n_ap: int) -> TabularPolicy:
    return TabularPolicy(
        option_probs=rng.dirichlet(np.ones(n_options), size=n_states),
        ap_probs=rng.dirichlet(np.ones(n_ap), size=(n_states, n_options)),
    )


def discretize_gaussian_ad(
    mean: float, variance: float, bounds: tuple[float, float], n_bins: int = DEFAULT_AP_BINS
) -> tuple[np.ndarray, np.ndarray]:
    """Evenly spaced AP values over the bounds with the clamped Gaussian's mass per bin.

    The outer bins absorb the tails beyond the bounds.
    """

    if not variance > 0:
        raise ValueError("AD variance must be strictly positive")
    if n_bins < 2:
        raise ValueError("at least two AP bins are required")
    low, high = bounds
    values = np.linspace(low, high, n_bins)
    edges = np.concatenate(([-np.inf], 0.5 * (values[1:] + values[:-1]), [np.inf]))
    cdf = norm.cdf(edges, loc=mean, scale=np.sqrt(variance))
    return values, np.diff(cdf)


def policy_grid_argmax(
    mdp: TinyMdp,
    policies: Sequence[TabularPolicy],
    zeta: float,
    horizon: int,
    *,
    tol: float = 1e-12,
) -> tuple[int, int]:
    """Indices of the grid policy maximizing success probability and augmented return.

    Values within ``tol`` of the maximum count as ties; the lowest index wins.
    """

    if not policies:
        raise ValueError("the policy grid is empty")
    success = np.array([success_probability(mdp, policy, zeta, horizon) for policy in policies])
    augmented = np.array([augmented_return(mdp, policy, zeta, horizon) for policy in policies])
    return (
        int(np.flatnonzero(success >= success.max() - tol)[0]),
        int(np.flatnonzero(augmented >= augmented.max() - tol)[0]),
    )


def finite_diff_grad(
    objective: Callable[[np.ndarray], float], params: np.ndarray, epsilon: float = 1e-5
) -> np.ndarray:
    """Central differences of ``objective`` at ``params``, one coordinate at a time."""

    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    base = np.array(params, dtype=float)
    flat = base.reshape(-1)
    grad = np.zeros_like(flat)
    for index in range(flat.shape[0]):
        plus = flat.copy()
        minus = flat.copy()
        plus[index] += epsilon
        minus[index] -= epsilon
        grad[index] = (
            objective(plus.reshape(base.shape)) - objective(minus.reshape(base.shape))
        ) / (2.0 * epsilon)
    return grad.reshape(base.shape)


def common_random_numbers(
    estimator: Callable[[np.ndarray, np.random.Generator], float], seed: int
) -> Callable[[np.ndarray], float]:
    """Freeze a stochastic J estimator so every evaluation replays the same random stream."""

    def objective(params: np.ndarray) -> float:
        return estimator(params, np.random.default_rng(seed))

    return objective


__all__ = [
    "MAX_HORIZON",
    "MAX_LEAVES",
    "PgValues",
    "TabularPolicy",
    "TinyMdp",
    "augmented_return",
    "common_random_numbers",
    "discretize_gaussian_ad",
    "enumerate_pg_values",
    "finite_diff_grad",
    "policy_grid_argmax",
    "random_tabular_policy",
    "random_tiny_mdp",
    "success_probability",
]
