"""Probabilistic-goal options learning with situationally aware options."""

from .models import AugmentedState, AwarenessTrajectory, EnvState, PgSmdpConfig, TransitionRecord
from .options import SituationallyAwareOption
from .pgsmdp import (
    Environment,
    StepOutcome,
    augment_transition,
    initial_state,
    pg_reward,
    success_probability_estimate,
)
from .policy import TwoTieredPolicy
from .rollout import rollout
from .schedule import StepSchedule, validate_schedule
from .trainer import TrainerSettings, er_train, estimate_gradients, evaluate_policy, project, sap_train

__version__ = "0.1.0"

__all__ = [
    "AugmentedState",
    "AwarenessTrajectory",
    "EnvState",
    "Environment",
    "PgSmdpConfig",
    "SituationallyAwareOption",
    "StepOutcome",
    "StepSchedule",
    "TrainerSettings",
    "TransitionRecord",
    "TwoTieredPolicy",
    "augment_transition",
    "er_train",
    "estimate_gradients",
    "evaluate_policy",
    "initial_state",
    "pg_reward",
    "project",
    "rollout",
    "sap_train",
    "success_probability_estimate",
    "validate_schedule",
]
