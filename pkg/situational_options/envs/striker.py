"""Simplified striker-versus-keeper soccer.

The field is the unit square, attacking toward the goal mouth on x = 1.
State coordinates are (agent x, agent y, ball x, ball y). The striker
chooses among Move-to-ball (M), Shoot (S) and Dribble (D); the dribble
power is D's awareness parameter. A scripted keeper stands on the goal
line and follows the ball's y within the mouth. A dribble that ends within
``capture_radius`` of the keeper is always lost; inside ``keeper_range``
the keeper intercepts with a probability that grows with the distance the
ball travelled that step. The keeper also collects every missed shot. Any
capture costs ``r_capture``. A per-step score reward encodes whether the
striker's team is winning or losing.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..features import FourierFeatureMap, LinearFeatureMap
from ..models import AugmentedState, EnvState
from ..options import SituationallyAwareOption
from ..pgsmdp import StepOutcome
from ..policy import TwoTieredPolicy

MOVE = 0
SHOOT = 1
DRIBBLE = 2
OPTION_NAMES = ("M", "S", "D")

Rect = tuple[float, float, float, float]


class StrikerConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["striker"] = "striker"
    scenario: Literal["winning", "losing"] = "losing"
    horizon: int = 150
    zeta: float = 1.0
    goal_center: tuple[float, float] = (1.0, 0.5)
    goal_half_width: float = Field(default=0.1, gt=0)
    near_radius: float = Field(default=0.3, gt=0)
    keeper_range: float = Field(default=0.2, gt=0)
    keeper_hazard: float = Field(default=0.2, ge=0, le=1)
    capture_radius: float = Field(default=0.05, gt=0)
    possession_radius: float = Field(default=0.02, gt=0)
    move_speed: float = Field(default=0.05, gt=0)
    dribble_base: float = Field(default=0.01, ge=0)
    dribble_gain: float = Field(default=0.05, ge=0)
    shot_p_max: float = Field(default=0.9, ge=0, le=1)
    shot_scale: float = Field(default=0.2, gt=0)
    max_power: float = Field(default=150.0, gt=0)
    r_move: float = 0.01
    r_dribble_far: float = 0.02
    r_dribble_near: float = -0.05
    r_shoot_near: float = 0.1
    r_shoot_far: float = -0.1
    r_score: float = -0.02
    goal_bonus: float = 10.0
    r_capture: float = -4.0
    kickoff_ball: Rect = (0.25, 0.35, 0.4, 0.6)
    train_ball_region: Rect | None = (0.2, 0.8, 0.2, 0.8)
    agent_offset: float = 0.1
    variance: float = Field(default=100.0, gt=0)
    fourier_order: int = Field(default=3, ge=1)
    eta_bounds: tuple[float, float] = (-3.0, 6.0)
    probes: dict[str, tuple[float, float]] = Field(
        default_factory=lambda: {"half-way": (0.5, 0.5), "near-goal": (0.85, 0.5)}
    )

    @model_validator(mode="after")
    def _check_scenario(self) -> "StrikerConfig":
        if self.horizon != 150:
            raise ValueError("striker episodes last exactly 150 timesteps")
        if self.scenario == "winning" and not self.r_score > 0:
            raise ValueError("r_score must be positive in the winning scenario")
        if self.scenario == "losing" and not self.r_score < 0:
            raise ValueError("r_score must be negative in the losing scenario")
        if not (self.r_dribble_far > 0 and self.r_shoot_near > 0 and self.r_move > 0):
            raise ValueError("r_dribble_far, r_shoot_near and r_move must be positive")
        if not (self.r_dribble_near < 0 and self.r_shoot_far < 0):
            raise ValueError("r_dribble_near and r_shoot_far must be negative")
        if not self.r_capture < 0:
            raise ValueError("r_capture must be negative")
        if self.capture_radius > self.keeper_range:
            raise ValueError("capture_radius must not exceed keeper_range")
        if not self.dribble_base + self.dribble_gain > 0:
            raise ValueError("a full-power dribble must move the ball")
        if self.eta_bounds[1] <= self.eta_bounds[0]:
            raise ValueError("eta_bounds must be increasing")
        return self


def _no_control(z: AugmentedState, ap: float, rng: np.random.Generator) -> None:
    return None


def _toward(x: float, y: float, tx: float, ty: float, distance: float) -> tuple[float, float, bool]:
    """Move (x, y) up to ``distance`` toward (tx, ty); the flag tells whether the target was reached."""

    gap = math.hypot(tx - x, ty - y)
    if gap <= distance:
        return tx, ty, True
    scale = distance / gap
    return x + (tx - x) * scale, y + (ty - y) * scale, False


class StrikerEnv:
    name = "striker"

    def __init__(self, config: StrikerConfig | None = None) -> None:
        self.config = config or StrikerConfig()
        self.horizon = self.config.horizon
        no_ap = (0.0, 0.0)
        self._options = (
            SituationallyAwareOption(MOVE, "M", _no_control, no_ap),
            SituationallyAwareOption(SHOOT, "S", _no_control, no_ap),
            SituationallyAwareOption(DRIBBLE, "D", _no_control, (0.0, self.config.max_power)),
        )

    @property
    def options(self) -> tuple[SituationallyAwareOption, ...]:
        return self._options

    @property
    def feature_goal(self) -> tuple[float, float]:
        return self.config.goal_center

    def inter_feature_map(self) -> FourierFeatureMap:
        low_eta, high_eta = self.config.eta_bounds
        return FourierFeatureMap(
            inputs=("x", "y", "eta"),
            low=(0.0, 0.0, low_eta),
            high=(1.0, 1.0, high_eta),
            order=self.config.fourier_order,
            goal=self.config.goal_center,
        )

    def ad_feature_map(self) -> LinearFeatureMap:
        return LinearFeatureMap(
            ("1", "x", "y", "eta", "dist_goal"), scales={"eta": 5.0}, goal=self.config.goal_center
        )

    def initial_policy(self) -> TwoTieredPolicy:
        return TwoTieredPolicy.initial(
            len(self._options), self.inter_feature_map(), self.ad_feature_map(), self.config.variance
        )

    def distance_to_goal(self, x: float, y: float) -> float:
        gx, gy = self.config.goal_center
        return math.hypot(gx - x, gy - y)

    def is_near(self, x: float, y: float) -> bool:
        return self.distance_to_goal(x, y) <= self.config.near_radius

    def shot_probability(self, x: float, y: float) -> float:
        cfg = self.config
        return cfg.shot_p_max * math.exp(-((self.distance_to_goal(x, y) / cfg.shot_scale) ** 2))

    def keeper_position(self, ball_y: float) -> tuple[float, float]:
        gx, gy = self.config.goal_center
        half = self.config.goal_half_width
        return gx, min(max(ball_y, gy - half), gy + half)

    def interception_probability(self, x: float, y: float, travel: float) -> float:
        """Chance the keeper takes the ball after a dribble of length ``travel`` ending at (x, y)."""

        cfg = self.config
        kx, ky = self.keeper_position(y)
        gap = math.hypot(kx - x, ky - y)
        if gap <= cfg.capture_radius:
            return 1.0
        if gap > cfg.keeper_range:
            return 0.0
        return min(cfg.keeper_hazard * travel / (cfg.dribble_base + cfg.dribble_gain), 1.0)

    def reset(self, rng: np.random.Generator, training: bool = True) -> EnvState:
        cfg = self.config
        region = cfg.kickoff_ball
        if training and cfg.train_ball_region is not None:
            region = cfg.train_ball_region
        bx = float(rng.uniform(region[0], region[1]))
        by = float(rng.uniform(region[2], region[3]))
        ax = max(bx - cfg.agent_offset, 0.0)
        ay = min(max(by + float(rng.uniform(-cfg.agent_offset, cfg.agent_offset)), 0.0), 1.0)
        return EnvState((ax, ay, bx, by), cfg.scenario)

    def step(
        self,
        z: AugmentedState,
        option: SituationallyAwareOption,
        ap: float,
        rng: np.random.Generator,
    ) -> StepOutcome:
        cfg = self.config
        ax, ay, bx, by = z.base.coords
        tag = z.base.scenario_tag
        reward = cfg.r_score
        in_possession = math.hypot(bx - ax, by - ay) <= cfg.possession_radius

        if not in_possession:
            ax, ay, _ = _toward(ax, ay, bx, by, cfg.move_speed)
            if option.id == MOVE:
                reward += cfg.r_move
            return StepOutcome(EnvState((ax, ay, bx, by), tag), reward, False)

        if option.id == MOVE:
            reward += cfg.r_move
            return StepOutcome(EnvState((bx, by, bx, by), tag), reward, False)

        gx, gy = cfg.goal_center
        if option.id == SHOOT:
            reward += cfg.r_shoot_near if self.is_near(bx, by) else cfg.r_shoot_far
            if rng.random() < self.shot_probability(bx, by):
                return StepOutcome(EnvState((bx, by, gx, gy), tag), reward + cfg.goal_bonus, True, "goal")
            return StepOutcome(EnvState((bx, by, gx, gy), tag), reward + cfg.r_capture, True, "captured")

        # The keeper holds the line, so a dribble can only end in a capture, never a goal.
        travel = cfg.dribble_base + cfg.dribble_gain * option.clamp_ap(ap) / cfg.max_power
        nx, ny, _ = _toward(bx, by, gx, gy, travel)
        reward += cfg.r_dribble_near if self.is_near(nx, ny) else cfg.r_dribble_far
        state = EnvState((nx, ny, nx, ny), tag)
        if rng.random() < self.interception_probability(nx, ny, travel):
            return StepOutcome(state, reward + cfg.r_capture, True, "captured")
        return StepOutcome(state, reward, False)

    def probe_states(self) -> dict[str, AugmentedState]:
        return {
            label: AugmentedState(EnvState((x, y, x, y), self.config.scenario))
            for label, (x, y) in self.config.probes.items()
        }


__all__ = ["DRIBBLE", "MOVE", "OPTION_NAMES", "SHOOT", "StrikerConfig", "StrikerEnv"]
