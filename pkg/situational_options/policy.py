"""Two-tiered option selection policy.

The inter-option policy is a Gibbs (softmax) distribution over options with
one linear weight block per option. Each option's awareness parameter is
drawn from a Gaussian whose mean is linear in the state features and whose
variance is fixed. Score functions are computed in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .features import FeatureMap
from .models import AugmentedState
from .options import SituationallyAwareOption


def _readonly(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class InterOptionParams:
    """alpha: one weight vector per option over the inter-option features."""

    alpha: np.ndarray

    def __post_init__(self) -> None:
        alpha = _readonly(self.alpha)
        if alpha.ndim != 2:
            raise ValueError("alpha must be a (n_options, d) matrix")
        if not np.all(np.isfinite(alpha)):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def zeros(cls, n_options: int, dim: int) -> "InterOptionParams":
        return cls(np.zeros((n_options, dim)))

    @property
    def n_options(self) -> int:
        return self.alpha.shape[0]

    def flat(self) -> np.ndarray:
        return self.alpha.reshape(-1).copy()


@dataclass(frozen=True)
class AwarenessDistParams:
    """Omega: one AD weight vector per option, plus the fixed AD variance V."""

    omega: np.ndarray
    variance: float

    def __post_init__(self) -> None:
        omega = _readonly(self.omega)
        if omega.ndim != 2:
            raise ValueError("omega must be a (n_options, m) matrix")
        if not np.all(np.isfinite(omega)):
            raise ValueError("omega must be finite")
        if not self.variance > 0:
            raise ValueError("AD variance must be strictly positive")
        object.__setattr__(self, "omega", omega)

    @classmethod
    def zeros(cls, n_options: int, dim: int, variance: float) -> "AwarenessDistParams":
        return cls(np.zeros((n_options, dim)), variance)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def flat(self) -> np.ndarray:
        return self.omega.reshape(-1).copy()


@dataclass(frozen=True)
class APSample:
    raw: float
    clamped: float


def _masked_scores(alpha: np.ndarray, phi: np.ndarray, available: Sequence[bool] | None) -> np.ndarray:
    if alpha.shape[1] != phi.shape[0]:
        raise ValueError(
            f"feature dimension {phi.shape[0]} does not match alpha blocks of size {alpha.shape[1]}"
        )
    scores = alpha @ phi
    if available is not None:
        mask = np.asarray(available, dtype=bool)
        if mask.shape != scores.shape:
            raise ValueError("availability mask must have one entry per option")
        if not mask.any():
            raise ValueError("no option is available in this state")
        scores = np.where(mask, scores, -np.inf)
    return scores


def option_probabilities(
    alpha: np.ndarray, phi: np.ndarray, available: Sequence[bool] | None = None
) -> np.ndarray:
    """Softmax of the per-option linear scores alpha_o . phi (unit temperature)."""

    scores = _masked_scores(alpha, phi, available)
    return np.exp(scores - logsumexp(scores))


def log_prob_option(
    alpha: np.ndarray, phi: np.ndarray, option: int, available: Sequence[bool] | None = None
) -> float:
    scores = _masked_scores(alpha, phi, available)
    return float(scores[option] - logsumexp(scores))


def sample_option(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    if probabilities.shape[0] == 1:
        return 0
    return int(rng.choice(probabilities.shape[0], p=probabilities))


def ad_mean(omega_i: np.ndarray, phi: np.ndarray) -> float:
    if omega_i.shape[0] != phi.shape[0]:
        raise ValueError(
            f"feature dimension {phi.shape[0]} does not match AD weights of size {omega_i.shape[0]}"
        )
    return float(phi @ omega_i)


def sample_ap(
    omega_i: np.ndarray,
    phi: np.ndarray,
    variance: float,
    bounds: tuple[float, float],
    rng: np.random.Generator,
    *,
    offset: float = 0.0,
) -> APSample:
    """Draw c ~ N(phi . w, V); the executed AP is offset + c clamped into bounds."""

    if not variance > 0:
        raise ValueError("AD variance must be strictly positive")
    raw = ad_mean(omega_i, phi) + math.sqrt(variance) * float(rng.standard_normal())
    low, high = bounds
    return APSample(raw=raw, clamped=float(min(max(offset + raw, low), high)))


def log_prob_ap(omega_i: np.ndarray, phi: np.ndarray, raw_ap: float, variance: float) -> float:
    return float(norm.logpdf(raw_ap, loc=ad_mean(omega_i, phi), scale=math.sqrt(variance)))


def log_prob_grad_alpha(
    alpha: np.ndarray, phi: np.ndarray, option: int, available: Sequence[bool] | None = None
) -> np.ndarray:
    """Gibbs score: phi in the chosen block minus probability-weighted phi in every block."""

    probabilities = option_probabilities(alpha, phi, available)
    grad = -np.outer(probabilities, phi)
    grad[option] += phi
    return grad


def log_prob_grad_omega(
    omega: np.ndarray, phi: np.ndarray, option: int, raw_ap: float, variance: float
) -> np.ndarray:
    """Gaussian score ((c - phi . w_o) / V) phi in the chosen option's block, zero elsewhere."""

    if not variance > 0:
        raise ValueError("AD variance must be strictly positive")
    grad = np.zeros_like(omega, dtype=float)
    grad[option] = ((raw_ap - ad_mean(omega[option], phi)) / variance) * phi
    return grad


@dataclass(frozen=True)
class TwoTieredPolicy:
    """mu(o, c | z) = mu_alpha(o | z) * mu_Omega^o(c | z)."""

    inter_features: FeatureMap
    ad_features: FeatureMap
    inter: InterOptionParams
    awareness: AwarenessDistParams

    def __post_init__(self) -> None:
        if self.inter.n_options != self.awareness.omega.shape[0]:
            raise ValueError("alpha and omega must cover the same options")
        if self.inter.alpha.shape[1] != self.inter_features.dim:
            raise ValueError("alpha block size must equal the inter-option feature dimension")
        if self.awareness.omega.shape[1] != self.ad_features.dim:
            raise ValueError("omega block size must equal the AD feature dimension")

    @classmethod
    def initial(
        cls,
        n_options: int,
        inter_features: FeatureMap,
        ad_features: FeatureMap,
        variance: float,
    ) -> "TwoTieredPolicy":
        """Uniform option choice and mid-range APs."""

        return cls(
            inter_features=inter_features,
            ad_features=ad_features,
            inter=InterOptionParams.zeros(n_options, inter_features.dim),
            awareness=AwarenessDistParams.zeros(n_options, ad_features.dim, variance),
        )

    @property
    def n_options(self) -> int:
        return self.inter.n_options

    @property
    def alpha(self) -> np.ndarray:
        return self.inter.alpha

    @property
    def omega(self) -> np.ndarray:
        return self.awareness.omega

    @property
    def variance(self) -> float:
        return self.awareness.variance

    def with_params(self, alpha: np.ndarray, omega: np.ndarray) -> "TwoTieredPolicy":
        return replace(
            self,
            inter=InterOptionParams(np.reshape(alpha, self.alpha.shape)),
            awareness=AwarenessDistParams(np.reshape(omega, self.omega.shape), self.variance),
        )

    def option_probabilities(
        self, z: AugmentedState, available: Sequence[bool] | None = None
    ) -> np.ndarray:
        return option_probabilities(self.alpha, self.inter_features(z), available)

    def ad_means(self, z: AugmentedState) -> np.ndarray:
        return self.omega @ self.ad_features(z)

    def select(
        self,
        z: AugmentedState,
        options: Sequence[SituationallyAwareOption],
        rng: np.random.Generator,
        *,
        greedy: bool = False,
    ) -> tuple[int, APSample, tuple[bool, ...], np.ndarray, np.ndarray]:
        """Draw an option among those that can start in z, then its AP."""

        available = tuple(option.can_start(z) for option in options)
        inter_phi = self.inter_features(z)
        ad_phi = self.ad_features(z)
        probabilities = option_probabilities(self.alpha, inter_phi, available)
        if greedy:
            chosen = int(np.argmax(probabilities))
        else:
            chosen = sample_option(probabilities, rng)
        option = options[chosen]
        if greedy:
            mean = ad_mean(self.omega[chosen], ad_phi)
            sample = APSample(raw=mean, clamped=option.clamp_ap(option.ap_center + mean))
        else:
            sample = sample_ap(
                self.omega[chosen],
                ad_phi,
                self.variance,
                option.ap_bounds,
                rng,
                offset=option.ap_center,
            )
        return chosen, sample, available, inter_phi, ad_phi


__all__ = [
    "APSample",
    "AwarenessDistParams",
    "InterOptionParams",
    "TwoTieredPolicy",
    "ad_mean",
    "log_prob_ap",
    "log_prob_grad_alpha",
    "log_prob_grad_omega",
    "log_prob_option",
    "option_probabilities",
    "sample_ap",
    "sample_option",
]
