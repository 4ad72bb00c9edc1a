"""Two-timescale step-size sequences and their validity check.

Both sequences must be non-summable and square-summable, and the fast
(awareness) sequence b_k must dominate the slow (inter-option) sequence a_k
at every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import ScheduleError

NUMERIC_CHECK_ITERATIONS = 1_000_000


class StepSchedule(BaseModel):
    """a_k = a0 * (k0 / (k0 + k - 1))^power_a and b_k likewise, for k >= 1."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["inverse-k", "inverse-k-power"] = "inverse-k-power"
    a0: float = Field(default=0.01, gt=0)
    b0: float = Field(default=0.1, gt=0)
    power_a: float = 1.0
    power_b: float = 0.6
    k0: float = Field(default=1.0, ge=1.0)

    @property
    def exponents(self) -> tuple[float, float]:
        if self.kind == "inverse-k":
            return 1.0, 1.0
        return self.power_a, self.power_b

    def a(self, k: int | np.ndarray) -> float | np.ndarray:
        return self.a0 * (self.k0 / (self.k0 + np.asarray(k, dtype=float) - 1.0)) ** self.exponents[0]

    def b(self, k: int | np.ndarray) -> float | np.ndarray:
        return self.b0 * (self.k0 / (self.k0 + np.asarray(k, dtype=float) - 1.0)) ** self.exponents[1]

    def steps(self, k: int) -> tuple[float, float]:
        if k < 1:
            raise ValueError("iterations are counted from k = 1")
        return float(self.a(k)), float(self.b(k))


@dataclass(frozen=True)
class ScheduleVerdict:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        return "ok" if self.ok else "; ".join(self.violations)


def _check_power(label: str, power: float) -> list[str]:
    if power <= 0.5:
        return [f"sum of {label}_k^2 diverges for exponent {power} (needs > 0.5)"]
    if power > 1.0:
        return [f"sum of {label}_k converges for exponent {power} (needs <= 1)"]
    return []


def validate_schedule(
    schedule: StepSchedule, *, iterations: int = NUMERIC_CHECK_ITERATIONS
) -> ScheduleVerdict:
    """Analytic check of the summability conditions plus a numeric b_k > a_k sweep."""

    power_a, power_b = schedule.exponents
    violations = _check_power("a", power_a) + _check_power("b", power_b)
    k = np.arange(1, iterations + 1, dtype=float)
    dominated = schedule.b(k) <= schedule.a(k)
    if np.any(dominated):
        first = int(k[np.argmax(dominated)])
        violations.append(f"b_k must exceed a_k for every k; fails first at k={first}")
    return ScheduleVerdict(ok=not violations, violations=violations)


def require_valid(schedule: StepSchedule) -> None:
    verdict = validate_schedule(schedule)
    if not verdict.ok:
        raise ScheduleError(f"invalid step schedule: {verdict.describe()}")


__all__ = ["ScheduleVerdict", "StepSchedule", "require_valid", "validate_schedule"]
