"""Tabular views of policies and trajectories for plotting and CSV dumps."""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import pandas as pd

from ..models import AugmentedState, AwarenessTrajectory
from ..policy import TwoTieredPolicy


def probe_ad_means(
    policy: TwoTieredPolicy,
    probes: Mapping[str, AugmentedState],
    option_names: Sequence[str],
    labels: Iterable[str] | None = None,
) -> pd.DataFrame:
    """AD mean phi(z)^T w_o of every option at the named probe states.

    Means are reported before the AP-interval midpoint offset, so an
    untrained policy reads zero everywhere.
    """

    if len(option_names) != policy.n_options:
        raise ValueError("one option name per policy option is required")
    selected = list(probes) if labels is None else list(labels)
    unknown = [label for label in selected if label not in probes]
    if unknown:
        raise ValueError(f"unknown probe labels: {unknown}; known: {sorted(probes)}")
    rows = []
    for label in selected:
        means = policy.ad_means(probes[label])
        for option_id, name in enumerate(option_names):
            rows.append({"probe": label, "option": name, "mean": float(means[option_id])})
    return pd.DataFrame(rows, columns=["probe", "option", "mean"])


def trajectories_to_frame(
    trajectories: Sequence[AwarenessTrajectory], option_names: Sequence[str] | None = None
) -> pd.DataFrame:
    """One row per step, with the base coordinates spread into coord_<i> columns."""

    rows = []
    for episode, trajectory in enumerate(trajectories):
        for record in trajectory.steps:
            row: dict[str, object] = {"episode": episode, "t": record.z.t}
            for index, value in enumerate(record.z.base.coords):
                row[f"coord_{index}"] = value
            row.update(
                {
                    "eta": record.z.eta,
                    "option": option_names[record.option_id] if option_names else record.option_id,
                    "ap": record.ap,
                    "raw_ap": record.raw_ap,
                    "decision": record.decision,
                    "base_reward": record.base_reward,
                    "pg_reward": record.pg_reward,
                    "terminal": record.terminal,
                    "event": record.event or "",
                }
            )
            rows.append(row)
    return pd.DataFrame(rows)


__all__ = ["probe_ad_means", "trajectories_to_frame"]
