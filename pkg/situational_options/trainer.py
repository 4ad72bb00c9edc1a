"""Policy-gradient training of two-tiered option policies.

The inter-option weights (alpha) move on the slow timescale a_k and the
awareness-distribution weights (Omega) on the fast timescale b_k. Both are
projected back onto a ball after every update. The same loop trains against
the probabilistic-goal objective (indicator rewards) or the plain expected
return (base rewards).
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Sequence

import numpy as np
from opentelemetry import trace
from pydantic import BaseModel, ConfigDict, Field

from .errors import NonFiniteGradientError, ScheduleError
from .models import AwarenessTrajectory, PgSmdpConfig
from .pgsmdp import Environment
from .policy import TwoTieredPolicy, log_prob_grad_alpha, log_prob_grad_omega
from .rollout import rollout
from .schedule import StepSchedule, require_valid

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

Objective = Literal["pg-smdp", "expected-return"]
EstimatorMode = Literal["vanilla", "actor-critic"]
GradientOracle = Callable[[TwoTieredPolicy], tuple[np.ndarray, np.ndarray]]


class TrainerSettings(BaseModel):
    """Batching, projection and critic settings shared by every training run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: EstimatorMode = "vanilla"
    batch_size: int = Field(default=10, ge=1)
    baseline: bool = False
    radius_alpha: float = Field(default=50.0, gt=0)
    radius_omega: float = Field(default=50.0, gt=0)
    critic_step_scale: float = Field(default=10.0, gt=0)
    critic_step_max: float = Field(default=0.1, gt=0)
    workers: int = Field(default=1, ge=1)
    parallel_updates: bool = False
    log_every: int = Field(default=100, ge=1)
    log_wall_time: bool = False


@dataclass(frozen=True)
class GradientEstimate:
    grad_alpha: np.ndarray
    grad_omega: np.ndarray
    batch_return_mean: float
    batch_size: int


@dataclass(frozen=True)
class CriticState:
    """Linear TD(0) value estimate over the AD state features."""

    value_weights: np.ndarray
    critic_step: float = 0.0

    def value(self, phi: np.ndarray) -> float:
        return float(self.value_weights @ phi)


@dataclass(frozen=True)
class EpisodeRecord:
    """One run-log line."""

    episode: int
    ret: float
    pg_return: float
    length: int
    success: bool
    event: str | None
    option_counts: list[int]
    ad_mean_probes: dict[str, dict[str, float]]
    wall_time: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "episode": self.episode,
            "return": self.ret,
            "pg_return": self.pg_return,
            "length": self.length,
            "success": self.success,
            "event": self.event,
            "option_counts": list(self.option_counts),
            "ad_mean_probes": self.ad_mean_probes,
            "wall_time": self.wall_time,
        }


@dataclass
class TrainingResult:
    policy: TwoTieredPolicy
    log: list[EpisodeRecord]
    critic: CriticState | None = None
    k: int = 0
    rng_state: dict[str, Any] = field(default_factory=dict)


def _step_rewards(trajectory: AwarenessTrajectory, objective: Objective) -> np.ndarray:
    if objective == "pg-smdp":
        return np.array([record.pg_reward for record in trajectory.steps], dtype=float)
    return np.array([record.base_reward for record in trajectory.steps], dtype=float)


def discounted_return(rewards: np.ndarray, gamma: float) -> float:
    return float(np.sum(rewards * gamma ** np.arange(rewards.shape[0])))


def returns_to_go(rewards: np.ndarray, gamma: float) -> np.ndarray:
    out = np.zeros_like(rewards)
    running = 0.0
    for index in range(rewards.shape[0] - 1, -1, -1):
        running = rewards[index] + gamma * running
        out[index] = running
    return out


def _check_compatible(trajectory: AwarenessTrajectory, policy: TwoTieredPolicy) -> None:
    for record in trajectory.steps:
        if not 0 <= record.option_id < policy.n_options:
            raise ValueError(f"trajectory uses option {record.option_id} unknown to the policy")
        if record.decision and record.inter_phi is not None:
            if record.inter_phi.shape[0] != policy.alpha.shape[1]:
                raise ValueError("trajectory inter-option features do not match alpha")
        if record.ad_phi is not None and record.ad_phi.shape[0] != policy.omega.shape[1]:
            raise ValueError("trajectory AD features do not match omega")


def _scores(record: Any, policy: TwoTieredPolicy) -> tuple[np.ndarray, np.ndarray]:
    inter_phi = record.inter_phi if record.inter_phi is not None else policy.inter_features(record.z)
    ad_phi = record.ad_phi if record.ad_phi is not None else policy.ad_features(record.z)
    grad_alpha = log_prob_grad_alpha(policy.alpha, inter_phi, record.option_id, record.available)
    grad_omega = log_prob_grad_omega(
        policy.omega, ad_phi, record.option_id, record.raw_ap, policy.variance
    )
    return grad_alpha, grad_omega


def estimate_gradients(
    batch: Sequence[AwarenessTrajectory],
    policy: TwoTieredPolicy,
    cfg: PgSmdpConfig,
    mode: EstimatorMode = "vanilla",
    *,
    objective: Objective = "pg-smdp",
    critic: CriticState | None = None,
    baseline: bool = False,
) -> GradientEstimate:
    """Likelihood-ratio estimates of grad_alpha J and grad_Omega J averaged over the batch.

    Vanilla: each trajectory's eligibility sums (sum of score functions over
    decision steps) are scaled by its discounted return. Actor-critic: each
    decision step's score is scaled by its discounted return-to-go minus the
    critic's value.
    """

    if not batch:
        raise ValueError("gradient estimation needs a nonempty batch")
    if mode == "actor-critic" and critic is None:
        raise ValueError("actor-critic estimation needs a critic")
    grad_alpha = np.zeros_like(policy.alpha, dtype=float)
    grad_omega = np.zeros_like(policy.omega, dtype=float)
    returns = []
    for trajectory in batch:
        _check_compatible(trajectory, policy)
        rewards = _step_rewards(trajectory, objective)
        returns.append(discounted_return(rewards, cfg.gamma))
    returns_array = np.array(returns)
    offset = float(returns_array.mean()) if baseline and mode == "vanilla" else 0.0

    for trajectory, ret in zip(batch, returns_array):
        if mode == "vanilla":
            weight = ret - offset
            if weight == 0.0:
                continue
            trace_alpha = np.zeros_like(grad_alpha)
            trace_omega = np.zeros_like(grad_omega)
            for record in trajectory.steps:
                if not record.decision:
                    continue
                g_alpha, g_omega = _scores(record, policy)
                trace_alpha += g_alpha
                trace_omega += g_omega
            grad_alpha += weight * trace_alpha
            grad_omega += weight * trace_omega
        else:
            assert critic is not None
            to_go = returns_to_go(_step_rewards(trajectory, objective), cfg.gamma)
            for index, record in enumerate(trajectory.steps):
                if not record.decision:
                    continue
                ad_phi = record.ad_phi if record.ad_phi is not None else policy.ad_features(record.z)
                advantage = to_go[index] - critic.value(ad_phi)
                if advantage == 0.0:
                    continue
                g_alpha, g_omega = _scores(record, policy)
                grad_alpha += advantage * g_alpha
                grad_omega += advantage * g_omega

    size = len(batch)
    return GradientEstimate(
        grad_alpha=grad_alpha / size,
        grad_omega=grad_omega / size,
        batch_return_mean=float(returns_array.mean()),
        batch_size=size,
    )


def td0_update(
    critic: CriticState,
    batch: Sequence[AwarenessTrajectory],
    policy: TwoTieredPolicy,
    gamma: float,
    *,
    objective: Objective = "pg-smdp",
) -> CriticState:
    """Linear TD(0) sweep over every step of the batch."""

    weights = np.array(critic.value_weights, dtype=float)
    step = critic.critic_step
    for trajectory in batch:
        rewards = _step_rewards(trajectory, objective)
        for record, reward in zip(trajectory.steps, rewards):
            phi = record.ad_phi if record.ad_phi is not None else policy.ad_features(record.z)
            if record.terminal:
                target = reward
            else:
                phi_next = (
                    record.ad_phi_next
                    if record.ad_phi_next is not None
                    else policy.ad_features(record.z_next)
                )
                target = reward + gamma * float(weights @ phi_next)
            weights += step * (target - float(weights @ phi)) * phi
    return CriticState(value_weights=weights, critic_step=step)


def project(params: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the ball of the given radius."""

    if not radius > 0:
        raise ValueError("projection radius must be positive")
    params = np.asarray(params, dtype=float)
    norm = float(np.linalg.norm(params))
    if norm <= radius:
        return params.copy()
    return params * (radius / norm)


@dataclass(frozen=True)
class UpdateChannel:
    """One independently steppable parameter block with its own step sequence and radius."""

    name: str
    step_size: Callable[[int], float]
    radius: float

    def apply(self, params: np.ndarray, grad: np.ndarray, k: int) -> np.ndarray:
        updated = project(params + self.step_size(k) * grad, self.radius)
        if float(np.linalg.norm(updated)) > self.radius * (1.0 + 1e-12):
            raise AssertionError(f"{self.name} left its projection ball at iteration {k}")
        return updated


def _ensure_finite(estimate: GradientEstimate, k: int) -> None:
    for block, grad in (("alpha", estimate.grad_alpha), ("omega", estimate.grad_omega)):
        if not np.all(np.isfinite(grad)):
            bad = int(np.size(grad) - np.count_nonzero(np.isfinite(grad)))
            logger.error("Aborting at iteration %d: %d non-finite %s entries", k, bad, block)
            raise NonFiniteGradientError(k, block, f"{bad} non-finite entries")


def probe_means(
    policy: TwoTieredPolicy, env: Environment, probes: dict[str, Any] | None = None
) -> dict[str, dict[str, float]]:
    states = probes if probes is not None else env.probe_states()
    table: dict[str, dict[str, float]] = {}
    for label, z in states.items():
        means = policy.ad_means(z)
        table[label] = {option.name: float(means[option.id]) for option in env.options}
    return table


def _episode_record(
    episode: int,
    trajectory: AwarenessTrajectory,
    cfg: PgSmdpConfig,
    n_options: int,
    probes: dict[str, dict[str, float]],
    wall_time: float | None,
) -> EpisodeRecord:
    total = trajectory.total_base_reward
    return EpisodeRecord(
        episode=episode,
        ret=total,
        pg_return=trajectory.total_pg_reward,
        length=trajectory.length,
        success=total >= cfg.zeta,
        event=trajectory.event,
        option_counts=trajectory.option_counts(n_options),
        ad_mean_probes=probes,
        wall_time=wall_time,
    )


def _collect(
    env: Environment,
    policy: TwoTieredPolicy,
    cfg: PgSmdpConfig,
    seeds: Sequence[int],
    *,
    greedy: bool,
    training: bool,
    workers: int,
) -> list[AwarenessTrajectory]:
    def run(seed: int) -> AwarenessTrajectory:
        return rollout(
            env, policy, cfg, np.random.default_rng(seed), greedy=greedy, training=training
        )

    if workers <= 1 or len(seeds) <= 1:
        return [run(seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, seeds))


def _draw_seeds(rng: np.random.Generator, count: int) -> list[int]:
    return [int(seed) for seed in rng.integers(0, 2**63 - 1, size=count)]


def _train(
    env: Environment,
    policy_init: TwoTieredPolicy,
    schedule: StepSchedule,
    cfg: PgSmdpConfig,
    episodes: int,
    rng: np.random.Generator,
    *,
    objective: Objective,
    settings: TrainerSettings,
    critic: CriticState | None = None,
    start_k: int = 0,
    gradient_oracle: GradientOracle | None = None,
) -> TrainingResult:
    require_valid(schedule)
    if episodes < 0:
        raise ValueError("episodes must be nonnegative")

    alpha_channel = UpdateChannel("alpha", lambda k: float(schedule.a(k)), settings.radius_alpha)
    omega_channel = UpdateChannel("omega", lambda k: float(schedule.b(k)), settings.radius_omega)
    policy = policy_init
    if settings.mode == "actor-critic" and critic is None:
        critic = CriticState(value_weights=np.zeros(policy.ad_features.dim))
    log: list[EpisodeRecord] = []
    k = start_k
    started = time.perf_counter()

    with tracer.start_as_current_span("train") as span:
        span.set_attribute("environment", env.name)
        span.set_attribute("objective", objective)
        span.set_attribute("episodes", episodes)
        pool = ThreadPoolExecutor(max_workers=2) if settings.parallel_updates else None
        try:
            while len(log) < episodes:
                k += 1
                a_k, b_k = schedule.steps(k)
                if not b_k > a_k:
                    raise ScheduleError(f"b_k={b_k} does not exceed a_k={a_k} at iteration {k}")
                size = min(settings.batch_size, episodes - len(log))
                probes = probe_means(policy, env)
                batch = _collect(
                    env,
                    policy,
                    cfg,
                    _draw_seeds(rng, size),
                    greedy=False,
                    training=True,
                    workers=settings.workers,
                )
                for trajectory in batch:
                    wall = time.perf_counter() - started if settings.log_wall_time else None
                    log.append(
                        _episode_record(len(log), trajectory, cfg, policy.n_options, probes, wall)
                    )

                if gradient_oracle is not None:
                    exact_alpha, exact_omega = gradient_oracle(policy)
                    estimate = GradientEstimate(
                        grad_alpha=np.reshape(exact_alpha, policy.alpha.shape),
                        grad_omega=np.reshape(exact_omega, policy.omega.shape),
                        batch_return_mean=float("nan"),
                        batch_size=0,
                    )
                else:
                    estimate = estimate_gradients(
                        batch,
                        policy,
                        cfg,
                        settings.mode,
                        objective=objective,
                        critic=critic,
                        baseline=settings.baseline,
                    )
                _ensure_finite(estimate, k)

                if pool is not None:
                    alpha_future = pool.submit(
                        alpha_channel.apply, policy.alpha, estimate.grad_alpha, k
                    )
                    omega_future = pool.submit(
                        omega_channel.apply, policy.omega, estimate.grad_omega, k
                    )
                    new_alpha, new_omega = alpha_future.result(), omega_future.result()
                else:
                    new_alpha = alpha_channel.apply(policy.alpha, estimate.grad_alpha, k)
                    new_omega = omega_channel.apply(policy.omega, estimate.grad_omega, k)

                if critic is not None:
                    critic = CriticState(
                        value_weights=critic.value_weights,
                        critic_step=min(settings.critic_step_scale * b_k, settings.critic_step_max),
                    )
                    critic = td0_update(critic, batch, policy, cfg.gamma, objective=objective)
                policy = policy.with_params(new_alpha, new_omega)

                if k % settings.log_every == 0:
                    recent = log[-settings.log_every * settings.batch_size:]
                    logger.info(
                        "iteration=%d episodes=%d success_rate=%.3f mean_return=%.3f a_k=%.3g b_k=%.3g",
                        k,
                        len(log),
                        float(np.mean([record.success for record in recent])),
                        float(np.mean([record.ret for record in recent])),
                        a_k,
                        b_k,
                    )
        finally:
            if pool is not None:
                pool.shutdown()
        span.set_attribute("iterations", k - start_k)

    return TrainingResult(
        policy=policy,
        log=log,
        critic=critic,
        k=k,
        rng_state=rng.bit_generator.state,
    )


def sap_train(
    env: Environment,
    policy_init: TwoTieredPolicy,
    schedule: StepSchedule,
    cfg: PgSmdpConfig,
    episodes: int,
    rng: np.random.Generator,
    *,
    settings: TrainerSettings | None = None,
    critic: CriticState | None = None,
    start_k: int = 0,
    gradient_oracle: GradientOracle | None = None,
) -> TrainingResult:
    """Two-timescale SAP updates against the probabilistic-goal (indicator) reward."""

    return _train(
        env,
        policy_init,
        schedule,
        cfg,
        episodes,
        rng,
        objective="pg-smdp",
        settings=settings or TrainerSettings(),
        critic=critic,
        start_k=start_k,
        gradient_oracle=gradient_oracle,
    )


def er_train(
    env: Environment,
    policy_init: TwoTieredPolicy,
    schedule: StepSchedule,
    cfg: PgSmdpConfig,
    episodes: int,
    rng: np.random.Generator,
    *,
    settings: TrainerSettings | None = None,
    critic: CriticState | None = None,
    start_k: int = 0,
) -> TrainingResult:
    """Same loop on the plain expected return of the base rewards; zeta only labels success in logs."""

    return _train(
        env,
        policy_init,
        schedule,
        cfg,
        episodes,
        rng,
        objective="expected-return",
        settings=settings or TrainerSettings(),
        critic=critic,
        start_k=start_k,
    )


def evaluate_policy(
    env: Environment,
    policy: TwoTieredPolicy,
    cfg: PgSmdpConfig,
    episodes: int,
    rng: np.random.Generator,
    *,
    greedy: bool = False,
    training: bool = False,
    workers: int = 1,
) -> tuple[list[EpisodeRecord], list[AwarenessTrajectory]]:
    """Frozen-parameter rollouts logged with the training schema."""

    if episodes < 1:
        raise ValueError("evaluation needs at least one episode")
    with tracer.start_as_current_span("evaluate") as span:
        span.set_attribute("environment", env.name)
        span.set_attribute("episodes", episodes)
        trajectories = _collect(
            env,
            policy,
            cfg,
            _draw_seeds(rng, episodes),
            greedy=greedy,
            training=training,
            workers=workers,
        )
    probes = probe_means(policy, env)
    records = [
        _episode_record(index, trajectory, cfg, policy.n_options, probes, None)
        for index, trajectory in enumerate(trajectories)
    ]
    return records, trajectories


__all__ = [
    "CriticState",
    "EpisodeRecord",
    "GradientEstimate",
    "TrainerSettings",
    "TrainingResult",
    "UpdateChannel",
    "discounted_return",
    "er_train",
    "estimate_gradients",
    "evaluate_policy",
    "probe_means",
    "project",
    "returns_to_go",
    "sap_train",
    "td0_update",
]
