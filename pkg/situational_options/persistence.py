"""Run logs (JSONL), checkpoints and summaries on disk."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError

from .errors import CheckpointMismatchError
from .policy import TwoTieredPolicy
from .trainer import CriticState, EpisodeRecord, TrainingResult

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


def _dumps(payload: Any, *, indent: int | None = None) -> str:
    return json.dumps(payload, sort_keys=True, indent=indent, allow_nan=False)


def write_run_log(path: Path, records: Iterable[EpisodeRecord | Mapping[str, Any]]) -> int:
    """Write one JSON object per line; returns the number of records written."""

    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            payload = record.to_dict() if isinstance(record, EpisodeRecord) else dict(record)
            handle.write(_dumps(payload) + "\n")
            count += 1
    logger.info("Wrote %d run-log records to %s", count, path)
    return count


def read_run_log(path: Path) -> list[dict[str, Any]]:
    records = []
    with path.open("r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{number}: invalid JSON ({exc.msg})") from exc
    return records


class Checkpoint(BaseModel):
    """Serializable snapshot of a training run at schedule position ``k``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    format_version: int = CHECKPOINT_FORMAT_VERSION
    environment: str
    alpha: list[list[float]]
    omega: list[list[float]]
    variance: float
    critic_weights: list[float] | None = None
    critic_step: float = 0.0
    rng_state: dict[str, Any]
    k: int = 0
    config_hash: str

    @classmethod
    def from_training(cls, result: TrainingResult, environment: str, config_hash: str) -> "Checkpoint":
        critic = result.critic
        return cls(
            environment=environment,
            alpha=result.policy.alpha.tolist(),
            omega=result.policy.omega.tolist(),
            variance=result.policy.variance,
            critic_weights=None if critic is None else critic.value_weights.tolist(),
            critic_step=0.0 if critic is None else critic.critic_step,
            rng_state=result.rng_state,
            k=result.k,
            config_hash=config_hash,
        )

    def restore_policy(self, template: TwoTieredPolicy) -> TwoTieredPolicy:
        """Load the stored weights into a policy with the same feature maps."""

        alpha = np.array(self.alpha, dtype=float)
        omega = np.array(self.omega, dtype=float)
        if alpha.shape != template.alpha.shape or omega.shape != template.omega.shape:
            raise CheckpointMismatchError(
                f"checkpoint shapes alpha{alpha.shape}/omega{omega.shape} do not match "
                f"the configured policy alpha{template.alpha.shape}/omega{template.omega.shape}"
            )
        if self.variance != template.variance:
            raise CheckpointMismatchError(
                f"checkpoint AD variance {self.variance} differs from configured {template.variance}"
            )
        return template.with_params(alpha, omega)

    def restore_critic(self) -> CriticState | None:
        if self.critic_weights is None:
            return None
        return CriticState(np.array(self.critic_weights, dtype=float), self.critic_step)

    def restore_rng(self) -> np.random.Generator:
        bit_generator = np.random.PCG64()
        bit_generator.state = self.rng_state
        return np.random.Generator(bit_generator)


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dumps(checkpoint.model_dump(), indent=2) + "\n", encoding="utf-8", newline="\n")


def load_checkpoint(
    path: Path, *, environment: str | None = None, config_hash: str | None = None
) -> Checkpoint:
    """Parse a checkpoint, rejecting other format versions and, when given, other environments."""

    payload = json.loads(path.read_text(encoding="utf-8"))
    version = payload.get("format_version") if isinstance(payload, dict) else None
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointMismatchError(
            f"{path}: checkpoint format version {version!r}, expected {CHECKPOINT_FORMAT_VERSION}"
        )
    try:
        checkpoint = Checkpoint.model_validate(payload)
    except ValidationError as exc:
        raise CheckpointMismatchError(f"{path}: malformed checkpoint: {exc}") from exc
    if environment is not None and checkpoint.environment != environment:
        raise CheckpointMismatchError(
            f"{path}: checkpoint was trained on {checkpoint.environment!r}, not {environment!r}"
        )
    if config_hash is not None and checkpoint.config_hash != config_hash:
        logger.warning(
            "Checkpoint %s was written for config %s; evaluating with config %s",
            path,
            checkpoint.config_hash[:12],
            config_hash[:12],
        )
    return checkpoint


def write_summary(path: Path, summary: Mapping[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dumps(dict(summary), indent=2) + "\n", encoding="utf-8", newline="\n")


def write_csv(frame: pd.DataFrame, path: Path, *, index: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, encoding="utf-8", lineterminator="\n")


__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "Checkpoint",
    "load_checkpoint",
    "read_run_log",
    "save_checkpoint",
    "write_csv",
    "write_run_log",
    "write_summary",
]
