"""Bottomless Pit of Death: a windy continuous gridworld with a wall, a pit and a goal.

The agent lives in the unit square. A wall at x = wall_x rises from the
floor; the pit sits directly above it. Two hand-specified options (one per
side of the partition line) pick N/S/E/W primitives from fixed,
state-independent distributions, so without awareness parameters the
easterly wind pushes the agent from the bottom-left start into the pit.
The AP of the active option is added to the East step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..features import LinearFeatureMap
from ..models import AugmentedState, EnvState
from ..options import SituationallyAwareOption
from ..pgsmdp import StepOutcome
from ..policy import TwoTieredPolicy

Rect = tuple[float, float, float, float]

PRIMITIVES: dict[str, tuple[float, float]] = {
    "N": (0.0, 1.0),
    "S": (0.0, -1.0),
    "E": (1.0, 0.0),
    "W": (-1.0, 0.0),
}
ACTION_ORDER = ("N", "S", "E", "W")


def _inside(rect: Rect, x: float, y: float) -> bool:
    x0, x1, y0, y1 = rect
    return x0 <= x <= x1 and y0 <= y <= y1


def _overlaps(a: Rect, b: Rect) -> bool:
    return a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]


class BpodOptionConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    action_probs: dict[Literal["N", "S", "E", "W"], float]
    east_of: float | None = None
    west_of: float | None = None
    termination: float = Field(default=0.2, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_distribution(self) -> "BpodOptionConfig":
        probs = list(self.action_probs.values())
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"action probabilities of option {self.name} must sum to 1")
        return self

    def distribution(self) -> np.ndarray:
        return np.array([self.action_probs.get(action, 0.0) for action in ACTION_ORDER])


def _default_options() -> tuple[BpodOptionConfig, ...]:
    return (
        BpodOptionConfig(name="up-right", action_probs={"N": 0.6, "E": 0.4}, west_of=0.6),
        BpodOptionConfig(name="down-right", action_probs={"S": 0.5, "E": 0.5}, east_of=0.6),
    )


class BpodConfig(BaseModel):
    """Geometry, wind, rewards and option set of the pit domain. Rectangles are (x0, x1, y0, y1)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["bpod"] = "bpod"
    step: float = Field(default=0.05, gt=0)
    wind_mean: float = 0.005
    wind_std: float = Field(default=0.005, ge=0)
    wall_x: float = 0.5
    wall_top: float = 0.45
    pit: Rect = (0.4, 0.6, 0.45, 0.6)
    goal: Rect = (0.8, 1.0, 0.05, 0.45)
    start_region: Rect = (0.2, 0.3, 0.05, 0.15)
    train_start_region: Rect | None = (0.05, 0.45, 0.05, 0.95)
    horizon: int = Field(default=80, ge=1)
    zeta: float = 50.0
    step_cost: float = -1.0
    wall_cost: float = -1.0
    pit_cost: float = -10.0
    goal_reward: float = 100.0
    ap_bounds: tuple[float, float] = (-0.05, 0.05)
    variance: float = Field(default=0.0025, gt=0)
    options: tuple[BpodOptionConfig, ...] = Field(default_factory=_default_options)
    probes: dict[str, tuple[float, float]] = Field(
        default_factory=lambda: {"X": (0.25, 0.15), "Y": (0.7, 0.7)}
    )

    @model_validator(mode="after")
    def _check_geometry(self) -> "BpodConfig":
        if not self.wind_mean > 0:
            raise ValueError("wind_mean must be positive (easterly wind)")
        for label, rect in (
            ("pit", self.pit),
            ("goal", self.goal),
            ("start_region", self.start_region),
            ("train_start_region", self.train_start_region),
        ):
            if rect is None:
                continue
            x0, x1, y0, y1 = rect
            if not (0.0 <= x0 <= x1 <= 1.0 and 0.0 <= y0 <= y1 <= 1.0):
                raise ValueError(f"{label} must be a rectangle inside the unit square")
        if self.pit[2] < self.wall_top:
            raise ValueError("pit must sit above the wall")
        if _overlaps(self.pit, self.goal):
            raise ValueError("goal must be disjoint from the pit")
        if _overlaps(self.start_region, self.pit):
            raise ValueError("start region must not touch the pit")
        if not self.options:
            raise ValueError("at least one option is required")
        return self


@dataclass(frozen=True)
class BpodMove:
    x: float
    y: float
    collided: bool


def bpod_transition(
    cfg: BpodConfig, position: tuple[float, float], action: str, ap: float, wind: float
) -> BpodMove:
    """Deterministic displacement of one primitive step with the given wind draw.

    A move whose path crosses the wall below its top loses its x component.
    A move leaving the unit square is clipped back inside. Both count as a
    collision.
    """

    x, y = position
    ux, uy = PRIMITIVES[action]
    dx = cfg.step * ux + wind
    dy = cfg.step * uy
    if action == "E":
        dx += ap
    target_x, target_y = x + dx, y + dy
    collided = False

    crosses = (x < cfg.wall_x <= target_x) or (target_x <= cfg.wall_x < x)
    if crosses and dx != 0.0:
        y_cross = y + (cfg.wall_x - x) / dx * dy
        if y_cross <= cfg.wall_top:
            target_x = x
            collided = True

    clipped_x = min(max(target_x, 0.0), 1.0)
    clipped_y = min(max(target_y, 0.0), 1.0)
    if clipped_x != target_x or clipped_y != target_y:
        collided = True
    return BpodMove(clipped_x, clipped_y, collided)


class BottomlessPit:
    name = "bpod"

    def __init__(self, config: BpodConfig | None = None) -> None:
        self.config = config or BpodConfig()
        self.horizon = self.config.horizon
        self._distributions = [option.distribution() for option in self.config.options]
        self._options = tuple(self._build_option(index, option) for index, option in enumerate(self.config.options))

    @property
    def options(self) -> tuple[SituationallyAwareOption, ...]:
        return self._options

    @property
    def feature_goal(self) -> tuple[float, float]:
        x0, x1, y0, y1 = self.config.goal
        return 0.5 * (x0 + x1), 0.5 * (y0 + y1)

    def _build_option(self, index: int, option: BpodOptionConfig) -> SituationallyAwareOption:
        partition = _partition(option.east_of, option.west_of)
        return SituationallyAwareOption(
            id=index,
            name=option.name,
            intra_policy=self._primitive_sampler(index),
            ap_bounds=self.config.ap_bounds,
            initiation=partition,
            termination=_persistence(partition, option.termination),
        )

    def _primitive_sampler(self, index: int):
        def sample(z: AugmentedState, ap: float, rng: np.random.Generator) -> str:
            return ACTION_ORDER[int(rng.choice(4, p=self._distributions[index]))]

        return sample

    def inter_feature_map(self) -> LinearFeatureMap:
        return LinearFeatureMap(("1", "x", "y"))

    def ad_feature_map(self) -> LinearFeatureMap:
        return LinearFeatureMap(("1", "x", "y", "x2", "y2", "eta"), scales={"eta": 100.0})

    def initial_policy(self) -> TwoTieredPolicy:
        return TwoTieredPolicy.initial(
            len(self._options), self.inter_feature_map(), self.ad_feature_map(), self.config.variance
        )

    def reset(self, rng: np.random.Generator, training: bool = True) -> EnvState:
        region = self.config.start_region
        if training and self.config.train_start_region is not None:
            region = self.config.train_start_region
        x0, x1, y0, y1 = region
        while True:
            x, y = float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1))
            if not (_inside(self.config.pit, x, y) or _inside(self.config.goal, x, y)):
                return EnvState((x, y))

    def step(
        self,
        z: AugmentedState,
        option: SituationallyAwareOption,
        ap: float,
        rng: np.random.Generator,
    ) -> StepOutcome:
        cfg = self.config
        action = option.act(z, ap, rng)
        wind = float(rng.normal(cfg.wind_mean, cfg.wind_std)) if cfg.wind_std > 0 else cfg.wind_mean
        x, y = z.base.coords
        move = bpod_transition(cfg, (x, y), action, ap, wind)
        state = EnvState((move.x, move.y), z.base.scenario_tag)
        if _inside(cfg.pit, move.x, move.y):
            return StepOutcome(state, cfg.pit_cost, True, "pit")
        if _inside(cfg.goal, move.x, move.y):
            return StepOutcome(state, cfg.goal_reward, True, "goal")
        return StepOutcome(state, cfg.wall_cost if move.collided else cfg.step_cost, False)

    def probe_states(self) -> dict[str, AugmentedState]:
        return {
            label: AugmentedState(EnvState(position)) for label, position in self.config.probes.items()
        }


def _partition(east_of: float | None, west_of: float | None):
    def initiation(z: AugmentedState) -> bool:
        x = z.base.coords[0]
        if east_of is not None and x < east_of:
            return False
        if west_of is not None and x >= west_of:
            return False
        return True

    return initiation


def _persistence(initiation, beta: float):
    """Ends the option with probability ``beta`` per step, and surely once it leaves its partition."""

    def termination(z: AugmentedState) -> float:
        return beta if initiation(z) else 1.0

    return termination


__all__ = ["BottomlessPit", "BpodConfig", "BpodMove", "BpodOptionConfig", "bpod_transition"]
