"""Experiment files: one TOML file describes one training or evaluation experiment."""

from __future__ import annotations

import hashlib
import json
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from ..envs import BanditConfig, BpodConfig, StrikerConfig, build_environment
from ..errors import ConfigError
from ..features import LinearFeatureMap
from ..models import PgSmdpConfig
from ..pgsmdp import Environment
from ..policy import TwoTieredPolicy
from ..schedule import StepSchedule, validate_schedule
from ..trainer import TrainerSettings

Algorithm = Literal["sap", "er", "fixed"]


class PgSmdpSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    zeta: float | None = None
    horizon: int | None = Field(default=None, ge=1)
    gamma: float = Field(default=1.0, ge=0.0, le=1.0)


class FeatureSettings(BaseModel):
    """Optional overrides of an environment's default linear feature maps."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    inter: tuple[str, ...] | None = None
    ad: tuple[str, ...] | None = None
    scales: dict[str, float] = Field(default_factory=dict)


EnvSection = Annotated[Union[BpodConfig, StrikerConfig, BanditConfig], Field(discriminator="kind")]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    algorithm: Algorithm = "sap"
    seed: int = 0
    episodes: int = Field(default=1000, ge=0)
    eval_episodes: int = Field(default=100, ge=1)
    greedy_eval: bool = True
    pg: PgSmdpSettings = Field(default_factory=PgSmdpSettings, validate_default=True)
    schedule: StepSchedule = Field(default_factory=StepSchedule)
    trainer: TrainerSettings = Field(default_factory=TrainerSettings)
    features: FeatureSettings = Field(default_factory=FeatureSettings)
    env: EnvSection

    @field_validator("pg")
    @classmethod
    def _zeta_for_sap(cls, value: PgSmdpSettings, info: ValidationInfo) -> PgSmdpSettings:
        if info.data.get("algorithm") == "sap" and value.zeta is None:
            raise ValueError("zeta is required for sap runs")
        return value

    @field_validator("schedule")
    @classmethod
    def _schedule_is_valid(cls, value: StepSchedule, info: ValidationInfo) -> StepSchedule:
        if info.data.get("algorithm") != "fixed":
            verdict = validate_schedule(value)
            if not verdict.ok:
                raise ValueError(f"invalid step schedule: {verdict.describe()}")
        return value

    @field_validator("env")
    @classmethod
    def _horizon_matches(cls, value: Any, info: ValidationInfo) -> Any:
        pg = info.data.get("pg")
        if pg is not None and pg.horizon is not None and pg.horizon != value.horizon:
            raise ValueError(f"pg.horizon={pg.horizon} disagrees with the {value.kind} horizon {value.horizon}")
        return value

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """Copy with top-level fields replaced, re-validated."""

        payload = self.model_dump()
        payload.update(changes)
        return ExperimentConfig.model_validate(payload)

    def pg_config(self) -> PgSmdpConfig:
        zeta = self.pg.zeta if self.pg.zeta is not None else self.env.zeta
        return PgSmdpConfig(zeta=zeta, horizon=self.env.horizon, gamma=self.pg.gamma)

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Experiment:
    """A validated config with its environment, initial policy and PG-SMDP settings built."""

    config: ExperimentConfig
    env: Environment
    policy: TwoTieredPolicy
    pg: PgSmdpConfig

    @property
    def option_names(self) -> list[str]:
        return [option.name for option in self.env.options]


def build_policy(config: ExperimentConfig, env: Any) -> TwoTieredPolicy:
    policy: TwoTieredPolicy = env.initial_policy()
    features = config.features
    if features.inter is None and features.ad is None:
        return policy
    inter = (
        LinearFeatureMap(features.inter, features.scales, env.feature_goal)
        if features.inter is not None
        else policy.inter_features
    )
    ad = (
        LinearFeatureMap(features.ad, features.scales, env.feature_goal)
        if features.ad is not None
        else policy.ad_features
    )
    return TwoTieredPolicy.initial(policy.n_options, inter, ad, policy.variance)


def build_experiment(config: ExperimentConfig) -> Experiment:
    env = build_environment(config.env)
    return Experiment(config=config, env=env, policy=build_policy(config, env), pg=config.pg_config())


_TABLE = re.compile(r"^\s*\[\[?\s*([^\]]+?)\s*\]\]?\s*(#.*)?$")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-.\"]+)\s*=")


def _key_lines(text: str) -> dict[str, int]:
    """Map dotted key paths (and table headers) to their 1-based line numbers."""

    lines: dict[str, int] = {}
    prefix = ""
    for number, line in enumerate(text.splitlines(), start=1):
        table = _TABLE.match(line)
        if table:
            prefix = table.group(1).replace('"', "").replace(" ", "")
            lines.setdefault(prefix, number)
            continue
        key = _KEY.match(line)
        if key:
            name = key.group(1).replace('"', "")
            lines.setdefault(f"{prefix}.{name}" if prefix else name, number)
    return lines


def _dotted_path(data: Any, loc: tuple[Any, ...]) -> str:
    """Follow an error location through the parsed document, skipping union tags and list indices."""

    path: list[str] = []
    node = data
    for part in loc:
        if isinstance(node, dict) and part in node:
            path.append(str(part))
            node = node[part]
        elif isinstance(node, list) and isinstance(part, int) and part < len(node):
            node = node[part]
    return ".".join(path)


def _line_for(path: str, key_lines: dict[str, int]) -> int | None:
    parts = path.split(".") if path else []
    while parts:
        candidate = ".".join(parts)
        if candidate in key_lines:
            return key_lines[candidate]
        parts.pop()
    return None


def _diagnostics(source: str, text: str, data: Any, error: ValidationError) -> list[str]:
    key_lines = _key_lines(text)
    messages = []
    for item in error.errors():
        path = _dotted_path(data, tuple(item["loc"]))
        line = _line_for(path, key_lines)
        where = f"{source}:{line}" if line is not None else source
        label = path or "<root>"
        messages.append(f"{where}: {label}: {item['msg']}")
    return messages


def parse_experiment(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: not valid TOML", [f"{source}: {exc}"]) from exc
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        diagnostics = _diagnostics(source, text, data, exc)
        raise ConfigError(f"{source}: invalid experiment configuration", diagnostics) from exc


def load_experiment(path: Path) -> ExperimentConfig:
    """Read and validate an experiment file, raising ConfigError with line-level diagnostics."""

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    return parse_experiment(text, str(path))


__all__ = [
    "Experiment",
    "ExperimentConfig",
    "FeatureSettings",
    "PgSmdpSettings",
    "build_experiment",
    "build_policy",
    "load_experiment",
    "parse_experiment",
]
