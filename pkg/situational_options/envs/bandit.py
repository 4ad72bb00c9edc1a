"""Two-state, two-option, one-step bandit with a closed-form objective.

Option "steady" wins with a fixed probability. Option "vigor" wins with a
probability that grows linearly with its clamped awareness parameter, so
both the inter-option weights and the awareness weights have a known exact
gradient.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import norm

from ..features import LinearFeatureMap
from ..models import AugmentedState, EnvState
from ..options import SituationallyAwareOption
from ..pgsmdp import StepOutcome
from ..policy import TwoTieredPolicy, option_probabilities

STEADY = 0
VIGOR = 1


class BanditConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["bandit"] = "bandit"
    p_steady: float = Field(default=0.5, ge=0.0, le=1.0)
    vigor_floor: float = Field(default=0.2, ge=0.0, le=1.0)
    vigor_gain: float = Field(default=0.6, ge=0.0)
    ap_low: float = 0.0
    ap_high: float = 1.0
    variance: float = Field(default=0.04, gt=0)
    horizon: Literal[1] = 1
    zeta: float = 1.0

    @model_validator(mode="after")
    def _check_probabilities(self) -> "BanditConfig":
        if not self.ap_high > self.ap_low:
            raise ValueError("ap_high must exceed ap_low")
        if self.vigor_floor + self.vigor_gain > 1.0:
            raise ValueError("vigor_floor + vigor_gain must not exceed 1")
        return self


def _no_control(z: AugmentedState, ap: float, rng: np.random.Generator) -> None:
    return None


class OptionBandit:
    name = "bandit"
    horizon = 1
    feature_goal = (0.0, 0.0)

    def __init__(self, config: BanditConfig | None = None) -> None:
        self.config = config or BanditConfig()
        bounds = (self.config.ap_low, self.config.ap_high)
        self._options = (
            SituationallyAwareOption(STEADY, "steady", _no_control, bounds),
            SituationallyAwareOption(VIGOR, "vigor", _no_control, bounds),
        )

    @property
    def options(self) -> tuple[SituationallyAwareOption, ...]:
        return self._options

    def feature_map(self) -> LinearFeatureMap:
        return LinearFeatureMap(("1", "x"))

    def initial_policy(self) -> TwoTieredPolicy:
        features = self.feature_map()
        return TwoTieredPolicy.initial(2, features, features, self.config.variance)

    def reset(self, rng: np.random.Generator, training: bool = True) -> EnvState:
        return EnvState((float(rng.integers(0, 2)),))

    def win_probability(self, option_id: int, ap: float) -> float:
        cfg = self.config
        if option_id == STEADY:
            return cfg.p_steady
        fraction = (ap - cfg.ap_low) / (cfg.ap_high - cfg.ap_low)
        return float(min(max(cfg.vigor_floor + cfg.vigor_gain * fraction, 0.0), 1.0))

    def step(
        self,
        z: AugmentedState,
        option: SituationallyAwareOption,
        ap: float,
        rng: np.random.Generator,
    ) -> StepOutcome:
        won = rng.random() < self.win_probability(option.id, ap)
        return StepOutcome(
            state=z.base,
            reward=1.0 if won else 0.0,
            terminal=True,
            event="win" if won else "loss",
        )

    def probe_states(self) -> dict[str, AugmentedState]:
        return {
            "state-0": AugmentedState(EnvState((0.0,))),
            "state-1": AugmentedState(EnvState((1.0,))),
        }

    # Exact quantities. The start state is uniform over {0, 1}.

    def _vigor_moments(self, mean_offset: float, variance: float) -> tuple[float, float]:
        """E[q(clamp(center + c))] and its derivative in the AD mean, for c ~ N(mean_offset, V)."""

        cfg = self.config
        low, high = cfg.ap_low, cfg.ap_high
        sigma = math.sqrt(variance)
        mean = 0.5 * (low + high) + mean_offset
        a = (low - mean) / sigma
        b = (high - mean) / sigma
        mass = norm.cdf(b) - norm.cdf(a)
        clamped_mean = (
            low * norm.cdf(a)
            + mean * mass
            + sigma * (norm.pdf(a) - norm.pdf(b))
            + high * norm.sf(b)
        )
        width = high - low
        value = cfg.vigor_floor + cfg.vigor_gain * (clamped_mean - low) / width
        slope = cfg.vigor_gain * mass / width
        return float(value), float(slope)

    def exact_objective(self, policy: TwoTieredPolicy) -> float:
        """Exact success probability of the policy (equal to its expected return here)."""

        total = 0.0
        for z in self.probe_states().values():
            probabilities = option_probabilities(policy.alpha, policy.inter_features(z))
            vigor, _ = self._vigor_moments(
                float(policy.omega[VIGOR] @ policy.ad_features(z)), policy.variance
            )
            total += 0.5 * (probabilities[STEADY] * self.config.p_steady + probabilities[VIGOR] * vigor)
        return total

    def exact_gradient(self, policy: TwoTieredPolicy) -> tuple[np.ndarray, np.ndarray]:
        grad_alpha = np.zeros_like(policy.alpha, dtype=float)
        grad_omega = np.zeros_like(policy.omega, dtype=float)
        for z in self.probe_states().values():
            inter_phi = policy.inter_features(z)
            ad_phi = policy.ad_features(z)
            probabilities = option_probabilities(policy.alpha, inter_phi)
            vigor, slope = self._vigor_moments(float(policy.omega[VIGOR] @ ad_phi), policy.variance)
            values = np.array([self.config.p_steady, vigor])
            state_value = float(probabilities @ values)
            grad_alpha += 0.5 * np.outer(probabilities * (values - state_value), inter_phi)
            grad_omega[VIGOR] += 0.5 * probabilities[VIGOR] * slope * ad_phi
        return grad_alpha, grad_omega

    def smoothed_objective(
        self, policy: TwoTieredPolicy, states: np.ndarray, noise: np.ndarray
    ) -> float:
        """Monte-Carlo J with the option draw integrated out, for finite-difference checks.

        ``states`` and ``noise`` are the common random numbers: start states in
        {0, 1} and standard-normal AD draws.
        """

        cfg = self.config
        states = np.asarray(states)
        noise = np.asarray(noise, dtype=float)
        sigma = math.sqrt(policy.variance)
        center = self._options[VIGOR].ap_center
        total = 0.0
        for label, z in enumerate(self.probe_states().values()):
            draws = noise[states == label]
            if draws.size == 0:
                continue
            probabilities = option_probabilities(policy.alpha, policy.inter_features(z))
            raw = float(policy.omega[VIGOR] @ policy.ad_features(z)) + sigma * draws
            ap = np.clip(center + raw, cfg.ap_low, cfg.ap_high)
            fraction = (ap - cfg.ap_low) / (cfg.ap_high - cfg.ap_low)
            vigor = np.clip(cfg.vigor_floor + cfg.vigor_gain * fraction, 0.0, 1.0)
            total += float(np.sum(probabilities[STEADY] * cfg.p_steady + probabilities[VIGOR] * vigor))
        return total / states.shape[0]


__all__ = ["BanditConfig", "OptionBandit", "STEADY", "VIGOR"]
