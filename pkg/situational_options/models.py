"""Value objects shared by the PG-SMDP core, the policy and the trainer."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _frozen_array(values: np.ndarray | None) -> np.ndarray | None:
    if values is None:
        return None
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class EnvState:
    """Base environment state s."""

    coords: tuple[float, ...]
    scenario_tag: str = ""

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in self.coords)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"state coordinates must be finite, got {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dims(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class AugmentedState:
    """Base state paired with the accumulated reward eta and the timestep t."""

    base: EnvState
    eta: float = 0.0
    t: int = 0

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError("timestep must be nonnegative")
        if not math.isfinite(self.eta):
            raise ValueError("accumulated reward must be finite")


@dataclass(frozen=True)
class PgSmdpConfig:
    """Threshold, horizon and discount of a probabilistic-goal SMDP."""

    zeta: float
    horizon: int
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not math.isfinite(self.zeta):
            raise ValueError("zeta must be finite")


@dataclass(frozen=True)
class TransitionRecord:
    """One step (z, o, c, r, z') of an awareness trajectory."""

    z: AugmentedState
    option_id: int
    ap: float
    base_reward: float
    pg_reward: float
    z_next: AugmentedState
    terminal: bool
    raw_ap: float = 0.0
    event: Optional[str] = None
    decision: bool = True
    available: Optional[tuple[bool, ...]] = None
    inter_phi: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    ad_phi: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    ad_phi_next: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.z_next.t != self.z.t + 1:
            raise ValueError("z_next.t must equal z.t + 1")
        if self.z_next.eta != self.z.eta + self.base_reward:
            raise ValueError("z_next.eta must equal z.eta + base_reward")
        object.__setattr__(self, "inter_phi", _frozen_array(self.inter_phi))
        object.__setattr__(self, "ad_phi", _frozen_array(self.ad_phi))
        object.__setattr__(self, "ad_phi_next", _frozen_array(self.ad_phi_next))


@dataclass(frozen=True)
class AwarenessTrajectory:
    """Ordered transition records of one episode."""

    steps: tuple[TransitionRecord, ...]

    def __post_init__(self) -> None:
        steps = tuple(self.steps)
        for index, record in enumerate(steps):
            is_last = index == len(steps) - 1
            if record.terminal and not is_last:
                raise ValueError("terminal flag may only be set on the final record")
        object.__setattr__(self, "steps", steps)

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def final_state(self) -> AugmentedState | None:
        return self.steps[-1].z_next if self.steps else None

    @property
    def total_base_reward(self) -> float:
        total = 0.0
        for record in self.steps:
            total += record.base_reward
        return total

    @property
    def total_pg_reward(self) -> float:
        total = 0.0
        for record in self.steps:
            total += record.pg_reward
        return total

    @property
    def event(self) -> str | None:
        return self.steps[-1].event if self.steps else None

    def option_counts(self, n_options: int) -> list[int]:
        counts = [0] * n_options
        for record in self.steps:
            counts[record.option_id] += 1
        return counts


__all__ = [
    "AugmentedState",
    "AwarenessTrajectory",
    "EnvState",
    "PgSmdpConfig",
    "TransitionRecord",
]
