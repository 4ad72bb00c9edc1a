from __future__ import annotations

import pytest
from pydantic import ValidationError

from situational_options.errors import ScheduleError
from situational_options.schedule import StepSchedule, require_valid, validate_schedule


def test_default_two_timescale_schedule_is_valid():
    schedule = StepSchedule(kind="inverse-k-power", a0=1.0, b0=1.5, power_a=1.0, power_b=0.6)
    verdict = validate_schedule(schedule)
    assert verdict.ok, verdict.describe()


def test_inverse_k_sequences():
    schedule = StepSchedule(kind="inverse-k-power", a0=1.0, b0=2.0, power_a=1.0, power_b=0.6)
    assert schedule.steps(1) == (1.0, 2.0)
    a_k, b_k = schedule.steps(32)
    assert a_k == pytest.approx(1 / 32)
    assert b_k == pytest.approx(2.0 / 32**0.6)


def test_shifted_schedule_starts_at_a0_and_decays():
    schedule = StepSchedule(a0=0.02, b0=2.0, k0=1000)
    assert schedule.steps(1) == pytest.approx((0.02, 2.0))
    assert schedule.a(1001) == pytest.approx(0.01)


def test_non_square_summable_sequence_is_rejected():
    verdict = validate_schedule(StepSchedule(a0=1.0, b0=2.0, power_a=0.5, power_b=0.6))
    assert not verdict.ok
    assert "a_k^2" in verdict.describe()


def test_summable_sequence_is_rejected():
    verdict = validate_schedule(StepSchedule(a0=1.0, b0=2.0, power_a=1.2, power_b=0.6))
    assert not verdict.ok


def test_equal_sequences_are_rejected():
    verdict = validate_schedule(StepSchedule(a0=1.0, b0=1.0, power_a=1.0, power_b=1.0))
    assert not verdict.ok
    assert "b_k must exceed a_k" in verdict.describe()


def test_fast_sequence_must_dominate_from_the_first_step():
    verdict = validate_schedule(StepSchedule(a0=1.0, b0=1.0, power_a=1.0, power_b=0.6))
    assert not verdict.ok
    assert "k=1" in verdict.describe()


def test_plain_inverse_k_kind_uses_unit_exponents():
    schedule = StepSchedule(kind="inverse-k", a0=0.1, b0=0.2, power_a=0.3, power_b=0.3)
    assert schedule.exponents == (1.0, 1.0)
    assert validate_schedule(schedule).ok


def test_require_valid_raises_schedule_error():
    with pytest.raises(ScheduleError):
        require_valid(StepSchedule(a0=1.0, b0=0.5))


def test_iterations_are_counted_from_one():
    with pytest.raises(ValueError):
        StepSchedule().steps(0)


def test_step_sizes_must_be_positive():
    with pytest.raises(ValidationError):
        StepSchedule(a0=0.0)
