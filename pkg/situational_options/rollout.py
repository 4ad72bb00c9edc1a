"""Sampling awareness trajectories from an environment under a two-tiered policy."""

from __future__ import annotations

import numpy as np

from .models import AwarenessTrajectory, PgSmdpConfig, TransitionRecord
from .pgsmdp import Environment, augment_transition, initial_state, pg_reward
from .policy import TwoTieredPolicy

OUT_OF_TIME = "out_of_time"


def rollout(
    env: Environment,
    policy: TwoTieredPolicy,
    cfg: PgSmdpConfig,
    rng: np.random.Generator,
    *,
    greedy: bool = False,
    training: bool = True,
) -> AwarenessTrajectory:
    """Run one episode until a terminal event or the horizon.

    A new option and AP are drawn only at decision points; an option keeps
    running with the same AP until its termination function fires.
    """

    options = env.options
    if len(options) != policy.n_options:
        raise ValueError(
            f"policy covers {policy.n_options} options but {env.name} exposes {len(options)}"
        )
    z = initial_state(env.reset(rng, training=training))
    steps: list[TransitionRecord] = []
    active: int | None = None
    raw_ap = ap = 0.0
    available: tuple[bool, ...] | None = None
    inter_phi: np.ndarray | None = None
    ad_phi = policy.ad_features(z)

    while True:
        decision = active is None
        if decision:
            active, sample, available, inter_phi, ad_phi = policy.select(
                z, options, rng, greedy=greedy
            )
            raw_ap, ap = sample.raw, sample.clamped
        assert active is not None
        option = options[active]
        outcome = env.step(z, option, ap, rng)
        z_next = augment_transition(z, outcome.reward, outcome.state, horizon=cfg.horizon)
        out_of_time = z_next.t >= cfg.horizon
        terminal = outcome.terminal or out_of_time
        event = outcome.event
        if terminal and event is None:
            event = OUT_OF_TIME
        ad_phi_next = policy.ad_features(z_next)
        steps.append(
            TransitionRecord(
                z=z,
                option_id=active,
                ap=ap,
                base_reward=outcome.reward,
                pg_reward=pg_reward(z_next, cfg, terminal=terminal),
                z_next=z_next,
                terminal=terminal,
                raw_ap=raw_ap,
                event=event,
                decision=decision,
                available=available if decision else None,
                inter_phi=inter_phi if decision else None,
                ad_phi=ad_phi,
                ad_phi_next=ad_phi_next,
            )
        )
        if terminal:
            return AwarenessTrajectory(tuple(steps))
        beta = option.termination_probability(z_next)
        if beta >= 1.0 or rng.random() < beta:
            active = None
        z = z_next
        ad_phi = ad_phi_next


__all__ = ["OUT_OF_TIME", "rollout"]
