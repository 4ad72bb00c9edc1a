"""State feature maps for the inter-option policy, the awareness distributions and the critic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np

from .models import AugmentedState

QuantityExtractor = Callable[[AugmentedState, tuple[float, float]], float]


def _agent_xy(z: AugmentedState) -> tuple[float, float]:
    coords = z.base.coords
    if len(coords) < 2:
        return coords[0], 0.0
    return coords[0], coords[1]


def _dist_goal(z: AugmentedState, goal: tuple[float, float]) -> float:
    x, y = _agent_xy(z)
    return math.hypot(goal[0] - x, goal[1] - y)


QUANTITIES: dict[str, QuantityExtractor] = {
    "1": lambda z, goal: 1.0,
    "x": lambda z, goal: _agent_xy(z)[0],
    "y": lambda z, goal: _agent_xy(z)[1],
    "x2": lambda z, goal: _agent_xy(z)[0] ** 2,
    "y2": lambda z, goal: _agent_xy(z)[1] ** 2,
    "eta": lambda z, goal: z.eta,
    "t": lambda z, goal: float(z.t),
    "dist_goal": _dist_goal,
}


def _check_names(names: Sequence[str]) -> tuple[str, ...]:
    unknown = [name for name in names if name not in QUANTITIES]
    if unknown:
        raise ValueError(f"unknown feature quantities: {unknown}; known: {sorted(QUANTITIES)}")
    return tuple(names)


class FeatureMap(Protocol):
    @property
    def dim(self) -> int:
        ...

    def __call__(self, z: AugmentedState) -> np.ndarray:
        ...


@dataclass(frozen=True)
class LinearFeatureMap:
    """Named features such as [1, x, y, eta, dist_goal], each divided by an optional scale."""

    names: tuple[str, ...]
    scales: Mapping[str, float] = field(default_factory=dict)
    goal: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        names = _check_names(self.names)
        if not names or names[0] != "1":
            raise ValueError("the first linear feature must be the constant bias '1'")
        for name, scale in self.scales.items():
            if scale == 0:
                raise ValueError(f"scale for {name} must be nonzero")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "scales", dict(self.scales))

    @property
    def dim(self) -> int:
        return len(self.names)

    def __call__(self, z: AugmentedState) -> np.ndarray:
        return np.array(
            [QUANTITIES[name](z, self.goal) / self.scales.get(name, 1.0) for name in self.names],
            dtype=float,
        )


@dataclass(frozen=True)
class FourierFeatureMap:
    """Coupled cosine Fourier basis cos(pi * c . x) over inputs normalized to [0, 1].

    Coefficient vectors c range over {0, ..., order}^input_dims.
    """

    inputs: tuple[str, ...]
    low: tuple[float, ...]
    high: tuple[float, ...]
    order: int = 3
    goal: tuple[float, float] = (0.0, 0.0)
    coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        inputs = _check_names(self.inputs)
        if self.order < 1:
            raise ValueError("Fourier order must be a positive integer")
        if not (len(inputs) == len(self.low) == len(self.high)):
            raise ValueError("inputs, low and high must have the same length")
        if any(h <= lo for lo, h in zip(self.low, self.high)):
            raise ValueError("each scaling interval needs high > low")
        dims = len(inputs)
        coeffs = np.indices((self.order + 1,) * dims).reshape((dims, -1)).T.astype(float)
        coeffs.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def input_dims(self) -> int:
        return len(self.inputs)

    @property
    def dim(self) -> int:
        return (self.order + 1) ** self.input_dims

    def normalize(self, z: AugmentedState) -> np.ndarray:
        raw = np.array([QUANTITIES[name](z, self.goal) for name in self.inputs], dtype=float)
        low = np.asarray(self.low, dtype=float)
        high = np.asarray(self.high, dtype=float)
        return np.clip((raw - low) / (high - low), 0.0, 1.0)

    def __call__(self, z: AugmentedState) -> np.ndarray:
        return np.cos(np.pi * self.coeffs @ self.normalize(z))


__all__ = ["FeatureMap", "FourierFeatureMap", "LinearFeatureMap", "QUANTITIES"]
