"""Command-line entry point: train, evaluate, export plot data and validate experiment files."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from opentelemetry import trace
from pydantic import ValidationError

from .config import ExperimentConfig, build_experiment, get_settings, load_experiment
from .config.experiment import Experiment
from .core import setup_logging, setup_telemetry
from .envs import probe_ad_means, trajectories_to_frame
from .errors import CheckpointMismatchError, ConfigError, NonFiniteGradientError
from .metrics import aggregate_eval, plot_frame, trial_metrics
from .persistence import (
    Checkpoint,
    load_checkpoint,
    read_run_log,
    save_checkpoint,
    write_csv,
    write_run_log,
    write_summary,
)
from .trainer import TrainingResult, er_train, evaluate_policy, sap_train

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NON_FINITE = 3
EXIT_CHECKPOINT = 4


def run_trial(
    experiment: Experiment, seed: int, out_dir: Path, resume: Checkpoint | None = None
) -> dict[str, Any]:
    """Train (or, for the fixed baseline, just roll out) one seed and write its artefacts.

    With ``resume`` the trial continues from a checkpoint: its parameters,
    critic, iteration counter and generator state replace the fresh ones, and
    ``config.episodes`` further episodes are run.
    """

    config = experiment.config
    rng = np.random.default_rng(seed) if resume is None else resume.restore_rng()
    policy = experiment.policy if resume is None else resume.restore_policy(experiment.policy)
    trial_dir = out_dir / f"trial-{seed}"
    config_hash = config.config_hash()

    with tracer.start_as_current_span("trial") as span:
        span.set_attribute("experiment", config.name)
        span.set_attribute("seed", seed)
        span.set_attribute("resumed_from_k", 0 if resume is None else resume.k)
        if config.algorithm == "fixed":
            log, _ = evaluate_policy(
                experiment.env,
                experiment.policy,
                experiment.pg,
                max(config.episodes, 1),
                rng,
                greedy=config.greedy_eval,
                training=False,
                workers=config.trainer.workers,
            )
            result = TrainingResult(policy=experiment.policy, log=log, rng_state=rng.bit_generator.state)
        else:
            train = sap_train if config.algorithm == "sap" else er_train
            result = train(
                experiment.env,
                policy,
                config.schedule,
                experiment.pg,
                config.episodes,
                rng,
                settings=config.trainer,
                critic=None if resume is None else resume.restore_critic(),
                start_k=0 if resume is None else resume.k,
            )

    write_run_log(trial_dir / "run_log.jsonl", result.log)
    save_checkpoint(
        trial_dir / "checkpoint.json",
        Checkpoint.from_training(result, experiment.env.name, config_hash),
    )
    probes = probe_ad_means(result.policy, experiment.env.probe_states(), experiment.option_names)
    summary = {
        "name": config.name,
        "algorithm": config.algorithm,
        "environment": experiment.env.name,
        "seed": seed,
        "episodes": len(result.log),
        "iterations": result.k,
        "config_hash": config_hash,
        "final_metrics": trial_metrics(result.log) if result.log else {},
        "ad_mean_probes": probes.to_dict(orient="records"),
    }
    write_summary(trial_dir / "summary.json", summary)
    logger.info("Trial %s seed=%d finished: %s", config.name, seed, summary["final_metrics"])
    return summary


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    changes: dict[str, Any] = {}
    if args.episodes is not None:
        changes["episodes"] = args.episodes
    if args.workers is not None:
        changes["trainer"] = config.trainer.model_copy(update={"workers": args.workers})
    if not changes:
        return config
    try:
        return config.with_overrides(**changes)
    except ValidationError as exc:
        raise ConfigError("invalid command-line override", [str(error["msg"]) for error in exc.errors()]) from exc


def _cmd_train(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_experiment(args.config), args)
    experiment = build_experiment(config)
    seed = config.seed if args.seed is None else args.seed
    out_dir = args.out or get_settings().output_dir / config.name
    logger.info(
        "Training %s (%s on %s), %d trial(s) from seed %d into %s",
        config.name,
        config.algorithm,
        experiment.env.name,
        args.trials,
        seed,
        out_dir,
    )
    if args.resume is not None:
        if args.trials != 1:
            raise ConfigError("--resume continues a single trial", [f"got --trials {args.trials}"])
        if config.algorithm == "fixed":
            raise ConfigError("--resume needs a learning algorithm", ["the fixed baseline has nothing to resume"])
        checkpoint = load_checkpoint(args.resume, environment=experiment.env.name, config_hash=config.config_hash())
        logger.info("Resuming from %s at iteration %d", args.resume, checkpoint.k)
        run_trial(experiment, seed, out_dir, resume=checkpoint)
        return EXIT_OK
    for trial_seed in range(seed, seed + args.trials):
        run_trial(experiment, trial_seed, out_dir)
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    config = load_experiment(args.config)
    experiment = build_experiment(config)
    checkpoint = load_checkpoint(
        args.checkpoint, environment=experiment.env.name, config_hash=config.config_hash()
    )
    policy = checkpoint.restore_policy(experiment.policy)
    seed = config.seed if args.seed is None else args.seed
    greedy = config.greedy_eval if args.greedy is None else args.greedy
    episodes = args.episodes or config.eval_episodes
    with tracer.start_as_current_span("eval") as span:
        span.set_attribute("experiment", config.name)
        records, trajectories = evaluate_policy(
            experiment.env,
            policy,
            experiment.pg,
            episodes,
            np.random.default_rng(seed),
            greedy=greedy,
            training=False,
            workers=args.workers or 1,
        )
    table = aggregate_eval([records], window=episodes)
    out_dir = args.out or args.checkpoint.parent
    write_csv(table, out_dir / "metrics.csv", index=True)
    if args.dump_trajectories:
        write_csv(
            trajectories_to_frame(trajectories, experiment.option_names), out_dir / "trajectories.csv"
        )
    print(table.to_string())
    return EXIT_OK


def _trial_label(path: Path, taken: set[str]) -> str:
    label = path.parent.name if path.name == "run_log.jsonl" else path.stem
    candidate, index = label, 1
    while candidate in taken:
        index += 1
        candidate = f"{label}-{index}"
    taken.add(candidate)
    return candidate


def _cmd_export(args: argparse.Namespace) -> int:
    taken: set[str] = set()
    logs = {_trial_label(path, taken): read_run_log(path) for path in args.logs}
    frame = plot_frame(logs)
    write_csv(frame, args.out)
    logger.info("Wrote %d plot rows for %d trial(s) to %s", len(frame), len(logs), args.out)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    status = EXIT_OK
    for path in args.configs:
        try:
            config = load_experiment(path)
        except ConfigError as exc:
            print(str(exc), file=sys.stderr)
            status = EXIT_CONFIG
            continue
        print(f"{path}: ok ({config.algorithm} on {config.env.kind}, hash {config.config_hash()[:16]})")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="situational-options",
        description="Train and evaluate situationally aware option policies",
    )
    parser.add_argument("--log-level", default=None, help="Override SAP_LOG_LEVEL (DEBUG, INFO, ...)")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="Run sap, er or fixed-option training from a config file")
    train.add_argument("config", type=Path)
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--out", type=Path, default=None, help="Output directory (default: $SAP_OUTPUT_DIR/<name>)")
    train.add_argument("--trials", type=int, default=1, help="Run seeds seed..seed+trials-1")
    train.add_argument("--workers", type=int, default=None, help="Parallel rollout workers")
    train.add_argument("--episodes", type=int, default=None, help="Override the configured episode count")
    train.add_argument(
        "--resume", type=Path, default=None, help="Continue training from a checkpoint written by an earlier run"
    )
    train.set_defaults(handler=_cmd_train)

    evaluate = commands.add_parser("eval", help="Evaluate a checkpoint with frozen parameters")
    evaluate.add_argument("checkpoint", type=Path)
    evaluate.add_argument("config", type=Path)
    evaluate.add_argument("--episodes", type=int, default=None)
    evaluate.add_argument("--greedy", action=argparse.BooleanOptionalAction, default=None)
    evaluate.add_argument("--seed", type=int, default=None)
    evaluate.add_argument("--workers", type=int, default=None)
    evaluate.add_argument("--out", type=Path, default=None)
    evaluate.add_argument("--dump-trajectories", action="store_true")
    evaluate.set_defaults(handler=_cmd_eval)

    export = commands.add_parser("export-plot-data", help="Long-format CSV series from run logs")
    export.add_argument("logs", type=Path, nargs="+")
    export.add_argument("--out", type=Path, required=True)
    export.set_defaults(handler=_cmd_export)

    validate = commands.add_parser("validate-config", help="Check experiment files without running them")
    validate.add_argument("configs", type=Path, nargs="+")
    validate.set_defaults(handler=_cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    setup_logging(args.log_level or settings.log_level)
    setup_telemetry(settings)
    logger.debug("Runtime settings: %s", settings.dict_for_logging())
    if getattr(args, "trials", 1) < 1:
        print("--trials must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteGradientError as exc:
        logger.error("Training aborted: %s", exc)
        return EXIT_NON_FINITE
    except CheckpointMismatchError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CHECKPOINT


if __name__ == "__main__":
    raise SystemExit(main())
