"""Situationally aware options: initiation set, intra-option controller, termination and AP range."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .models import AugmentedState

InitiationSet = Callable[[AugmentedState], bool]
IntraOptionPolicy = Callable[[AugmentedState, float, np.random.Generator], Any]
TerminationFunction = Callable[[AugmentedState], float]


def everywhere(_: AugmentedState) -> bool:
    return True


def one_step(_: AugmentedState) -> float:
    return 1.0


@dataclass(frozen=True)
class SituationallyAwareOption:
    """A temporally extended action whose execution is modulated by an awareness parameter.

    The awareness-distribution weights are owned by the policy (one row of
    Omega per option id) so that options stay reusable across policies.
    """

    id: int
    name: str
    intra_policy: IntraOptionPolicy
    ap_bounds: tuple[float, float]
    initiation: InitiationSet = everywhere
    termination: TerminationFunction = one_step

    def __post_init__(self) -> None:
        low, high = self.ap_bounds
        if not low <= high:
            raise ValueError(f"AP bounds for option {self.name} are inverted: {self.ap_bounds}")

    @property
    def ap_center(self) -> float:
        low, high = self.ap_bounds
        return 0.5 * (low + high)

    def clamp_ap(self, value: float) -> float:
        low, high = self.ap_bounds
        return float(min(max(value, low), high))

    def can_start(self, z: AugmentedState) -> bool:
        return bool(self.initiation(z))

    def act(self, z: AugmentedState, ap: float, rng: np.random.Generator) -> Any:
        return self.intra_policy(z, ap, rng)

    def termination_probability(self, z: AugmentedState) -> float:
        beta = float(self.termination(z))
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"termination probability of {self.name} outside [0, 1]: {beta}")
        return beta


__all__ = ["SituationallyAwareOption", "everywhere", "one_step"]
