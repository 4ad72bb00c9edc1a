from __future__ import annotations

import math

import numpy as np
import pytest

from situational_options.features import FourierFeatureMap, LinearFeatureMap
from situational_options.models import AugmentedState, EnvState


def _z(x: float, y: float, eta: float = 0.0, t: int = 0) -> AugmentedState:
    return AugmentedState(EnvState((x, y)), eta=eta, t=t)


def test_fourier_dimension_is_order_plus_one_to_the_inputs():
    fmap = FourierFeatureMap(("x", "y", "eta"), (0.0, 0.0, -3.0), (1.0, 1.0, 6.0), order=3)
    assert fmap.dim == 64
    assert fmap(_z(0.3, 0.7, 1.0)).shape == (64,)


def test_fourier_of_zero_input_is_all_ones():
    fmap = FourierFeatureMap(("x", "y"), (0.0, 0.0), (1.0, 1.0), order=2)
    np.testing.assert_array_equal(fmap(_z(0.0, 0.0)), np.ones(9))


def test_fourier_outputs_are_bounded():
    fmap = FourierFeatureMap(("x", "y", "eta"), (0.0, 0.0, -3.0), (1.0, 1.0, 6.0), order=3)
    rng = np.random.default_rng(0)
    for _ in range(50):
        values = fmap(_z(*rng.uniform(0, 1, size=2), eta=float(rng.uniform(-10, 10))))
        assert np.all(np.abs(values) <= 1.0)


def test_fourier_clips_inputs_outside_the_scaling_interval():
    fmap = FourierFeatureMap(("eta",), (-3.0,), (6.0,), order=1)
    np.testing.assert_allclose(fmap(_z(0, 0, eta=100.0)), [1.0, -1.0])


def test_fourier_rejects_bad_scaling():
    with pytest.raises(ValueError):
        FourierFeatureMap(("x",), (1.0,), (1.0,))
    with pytest.raises(ValueError):
        FourierFeatureMap(("x", "y"), (0.0,), (1.0,))
    with pytest.raises(ValueError):
        FourierFeatureMap(("x",), (0.0,), (1.0,), order=0)


def test_linear_features_with_scales_and_goal_distance():
    fmap = LinearFeatureMap(("1", "x", "y", "eta", "dist_goal"), scales={"eta": 5.0}, goal=(1.0, 0.5))
    values = fmap(_z(0.7, 0.1, eta=2.5))
    np.testing.assert_allclose(values, [1.0, 0.7, 0.1, 0.5, math.hypot(0.3, 0.4)])


def test_linear_squares_for_the_pit_domain():
    fmap = LinearFeatureMap(("1", "x", "y", "x2", "y2", "eta"))
    np.testing.assert_allclose(fmap(_z(0.5, 0.2, eta=-3.0)), [1.0, 0.5, 0.2, 0.25, 0.04, -3.0])


def test_linear_first_feature_must_be_bias():
    with pytest.raises(ValueError):
        LinearFeatureMap(("x", "1"))
    with pytest.raises(ValueError):
        LinearFeatureMap(())


def test_unknown_quantity_is_rejected():
    with pytest.raises(ValueError, match="unknown feature"):
        LinearFeatureMap(("1", "speed"))
