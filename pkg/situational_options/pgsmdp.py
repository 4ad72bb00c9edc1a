"""Probabilistic-goal SMDP construction.

The state is augmented with the reward accumulated so far, and the reward
becomes the indicator that the accumulated reward reached the threshold
when the episode ends. Maximizing the expected augmented return is then the
same as maximizing the probability of reaching the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from .models import AugmentedState, AwarenessTrajectory, EnvState, PgSmdpConfig
from .options import SituationallyAwareOption


@dataclass(frozen=True)
class StepOutcome:
    """Result of executing one primitive step of an option."""

    state: EnvState
    reward: float
    terminal: bool
    event: str | None = None


class Environment(Protocol):
    """Simulated domain consumed by rollouts and trainers."""

    name: str
    horizon: int

    @property
    def options(self) -> tuple[SituationallyAwareOption, ...]:
        ...

    def reset(self, rng: np.random.Generator, training: bool = True) -> EnvState:
        ...

    def step(
        self,
        z: AugmentedState,
        option: SituationallyAwareOption,
        ap: float,
        rng: np.random.Generator,
    ) -> StepOutcome:
        ...

    def probe_states(self) -> Mapping[str, AugmentedState]:
        ...


def initial_state(s0: EnvState) -> AugmentedState:
    return AugmentedState(base=s0, eta=0.0, t=0)


def augment_transition(
    z: AugmentedState,
    base_reward: float,
    s_next: EnvState,
    *,
    horizon: int | None = None,
) -> AugmentedState:
    """Return z' = {s', eta + r} one timestep later."""

    if not math.isfinite(base_reward):
        raise ValueError(f"base reward must be finite, got {base_reward}")
    if horizon is not None and z.t >= horizon:
        raise ValueError(f"cannot step past the horizon (t={z.t}, T={horizon})")
    return AugmentedState(base=s_next, eta=z.eta + base_reward, t=z.t + 1)


def pg_reward(z: AugmentedState, cfg: PgSmdpConfig, *, terminal: bool = False) -> float:
    """Indicator reward: 1 when the episode ends at z with eta >= zeta, else 0.

    An episode that ends early (``terminal``) is scored as if its end were
    the horizon.
    """

    if z.t > cfg.horizon:
        raise ValueError(f"timestep {z.t} exceeds horizon {cfg.horizon}")
    if (z.t == cfg.horizon or terminal) and z.eta >= cfg.zeta:
        return 1.0
    return 0.0


def trajectory_succeeded(trajectory: AwarenessTrajectory, cfg: PgSmdpConfig) -> bool:
    return trajectory.total_base_reward >= cfg.zeta


def success_probability_estimate(
    trajectories: Sequence[AwarenessTrajectory], cfg: PgSmdpConfig
) -> float:
    """Fraction of trajectories whose total base reward reached zeta.

    Cross-checks the indicator/expectation identity: the mean augmented
    return over the same batch must be identical.
    """

    if not trajectories:
        raise ValueError("at least one trajectory is required")
    successes = sum(1 for trajectory in trajectories if trajectory_succeeded(trajectory, cfg))
    fraction = successes / len(trajectories)
    augmented = sum(trajectory.total_pg_reward for trajectory in trajectories) / len(trajectories)
    if augmented != fraction:
        raise AssertionError(
            f"augmented return {augmented!r} disagrees with success fraction {fraction!r}"
        )
    return fraction


__all__ = [
    "Environment",
    "StepOutcome",
    "augment_transition",
    "initial_state",
    "pg_reward",
    "success_probability_estimate",
    "trajectory_succeeded",
]
