"""Exception types raised across the situational options library."""

from __future__ import annotations

from typing import Sequence


class ScheduleError(ValueError):
    """A step-size schedule violates the two-timescale conditions."""


class ConfigError(ValueError):
    """An experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, diagnostics: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.diagnostics = list(diagnostics)

    def __str__(self) -> str:
        if not self.diagnostics:
            return super().__str__()
        return "\n".join([super().__str__(), *self.diagnostics])


class NonFiniteGradientError(FloatingPointError):
    """A gradient estimate contained NaN or infinite entries."""

    def __init__(self, iteration: int, block: str, detail: str = "") -> None:
        message = f"non-finite {block} gradient at iteration {iteration}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.iteration = iteration
        self.block = block


class OutcomeTreeTooLargeError(ValueError):
    """Exhaustive enumeration would exceed the configured leaf limit."""


class CheckpointMismatchError(ValueError):
    """A checkpoint does not match the configuration it is loaded against."""


__all__ = [
    "CheckpointMismatchError",
    "ConfigError",
    "NonFiniteGradientError",
    "OutcomeTreeTooLargeError",
    "ScheduleError",
]
