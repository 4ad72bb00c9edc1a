"""Evaluation tables and plot series computed from run logs."""

from __future__ import annotations

from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd

from .trainer import EpisodeRecord

REQUIRED_FIELDS = ("episode", "return", "length", "success", "event")
METRIC_ROWS = ("Goals", "Successes", "Out of Time", "Avg Reward", "Episode Length", "Captures")


def _as_frame(records: Sequence[EpisodeRecord | Mapping[str, Any]]) -> pd.DataFrame:
    rows = [record.to_dict() if isinstance(record, EpisodeRecord) else dict(record) for record in records]
    frame = pd.DataFrame(rows)
    missing = [name for name in REQUIRED_FIELDS if name not in frame.columns]
    if missing:
        raise ValueError(f"run log records are missing fields: {missing}")
    return frame


def trial_metrics(records: Sequence[EpisodeRecord | Mapping[str, Any]], window: int = 100) -> dict[str, float]:
    """Counts and averages over the last ``window`` episodes of one trial."""

    if window < 1:
        raise ValueError("window must be at least one episode")
    if not records:
        raise ValueError("cannot aggregate an empty window")
    frame = _as_frame(records).tail(window)
    events = frame["event"].fillna("")
    return {
        "Goals": float((events == "goal").sum()),
        "Successes": float(frame["success"].astype(bool).sum()),
        "Out of Time": float((events == "out_of_time").sum()),
        "Avg Reward": float(frame["return"].mean()),
        "Episode Length": float(frame["length"].mean()),
        "Captures": float((events == "captured").sum()),
    }


def aggregate_eval(
    trials: Sequence[Sequence[EpisodeRecord | Mapping[str, Any]]], window: int = 100
) -> pd.DataFrame:
    """Mean and sample standard deviation of each metric across independent trials."""

    if not trials:
        raise ValueError("at least one trial log is required")
    per_trial = pd.DataFrame([trial_metrics(records, window) for records in trials], columns=METRIC_ROWS)
    std = per_trial.std(ddof=1) if len(per_trial) > 1 else pd.Series(0.0, index=per_trial.columns)
    table = pd.DataFrame({"mean": per_trial.mean(), "std": std})
    table.index.name = "metric"
    return table.loc[list(METRIC_ROWS)]


def plot_frame(trial_logs: Mapping[str, Sequence[EpisodeRecord | Mapping[str, Any]]]) -> pd.DataFrame:
    """Long-format series keyed by (trial, episode, metric).

    Metrics: per-episode return, its running sum, running success and goal
    counts, and one ``ad_mean/<probe>/<option>`` series per probe entry.
    """

    parts = []
    for trial, records in trial_logs.items():
        frame = _as_frame(records).sort_values("episode")
        episodes = frame["episode"].to_numpy()
        series: dict[str, np.ndarray] = {
            "return": frame["return"].to_numpy(dtype=float),
            "cumulative_return": np.cumsum(frame["return"].to_numpy(dtype=float)),
            "cumulative_successes": np.cumsum(frame["success"].astype(int).to_numpy()),
            "cumulative_goals": np.cumsum((frame["event"] == "goal").astype(int).to_numpy()),
        }
        if "ad_mean_probes" in frame.columns:
            flattened = pd.json_normalize(frame["ad_mean_probes"].tolist(), sep="/")
            for column in flattened.columns:
                series[f"ad_mean/{column}"] = flattened[column].to_numpy(dtype=float)
        for metric, values in series.items():
            parts.append(
                pd.DataFrame({"trial": str(trial), "episode": episodes, "metric": metric, "value": values})
            )
    if not parts:
        return pd.DataFrame(columns=["trial", "episode", "metric", "value"])
    return pd.concat(parts, ignore_index=True)


__all__ = ["METRIC_ROWS", "aggregate_eval", "plot_frame", "trial_metrics"]
