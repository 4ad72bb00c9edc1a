"""Runtime settings and experiment configuration."""

from .experiment import (
    Experiment,
    ExperimentConfig,
    FeatureSettings,
    PgSmdpSettings,
    build_experiment,
    build_policy,
    load_experiment,
    parse_experiment,
)
from .settings import DEFAULT_OUTPUT_DIR, RuntimeSettings, get_settings

__all__ = [
    "DEFAULT_OUTPUT_DIR",
    "Experiment",
    "ExperimentConfig",
    "FeatureSettings",
    "PgSmdpSettings",
    "RuntimeSettings",
    "build_experiment",
    "build_policy",
    "get_settings",
    "load_experiment",
    "parse_experiment",
]
