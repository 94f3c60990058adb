"""
Concealment objectives combining the target loss a = L_target(f(x), y)
with the discriminator term d = -log D(x)

sum:       g = a + alpha * d; with normalize_gradients the attacks ascend along
           grad a / |grad a| + alpha * grad d / |grad d| (per series)
harmonic:  g = 2 a d / (a + d + gamma)
hypercone: mixes the two input gradients directly (gradient attacks only)
"""

import math
from enum import Enum
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

D_CLAMP = 1e-7
PHI_CLAMP = 1e-6

Number = Union[float, np.ndarray]


class AggregationError(ValueError):
    """Aggregation inputs are non-finite or negative"""


class DegenerateGradientError(ValueError):
    """A gradient has zero norm, so the hypercone angle is undefined"""


class AggregationKind(str, Enum):
    NONE = "none"
    SUM = "sum"
    HARMONIC = "harmonic"
    HYPERCONE = "hypercone"


class AggregationSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: AggregationKind = AggregationKind.NONE
    alpha: float = Field(1.0, ge=0.0)
    gamma: float = Field(1e-8, gt=0.0)
    delta: float = 0.0
    # sum only: mix the per-series unit-norm gradients of a and d
    normalize_gradients: bool = True

    @model_validator(mode="after")
    def _check_delta(self) -> "AggregationSpec":
        if self.kind == AggregationKind.HYPERCONE and not abs(self.delta) < math.pi / 2:
            raise ValueError(f"hypercone delta must lie in (-pi/2, pi/2), got {self.delta}")
        return self

    @property
    def regularized(self) -> bool:
        return self.kind != AggregationKind.NONE


def _finite(*values: Number) -> None:
    for value in values:
        if not np.all(np.isfinite(value)):
            raise AggregationError("aggregation inputs must be finite")


def clamp_disc_score(score: Number) -> Number:
    return np.clip(score, D_CLAMP, 1.0 - D_CLAMP)


def clamp_neg_log_d(neg_log_d: Number) -> Number:
    """Equivalent to -log(clamp(D)) when given -log D"""
    return np.clip(neg_log_d, -math.log1p(-D_CLAMP), -math.log(D_CLAMP))


def sum_objective(l_target: Number, neg_log_d: Number, alpha: float) -> Number:
    _finite(l_target, neg_log_d, alpha)
    return l_target + alpha * neg_log_d


def harmonic_objective(a: Number, d: Number, gamma: float) -> Number:
    """2ad / (a + d + gamma); gamma = 0 is accepted, a zero denominator gives 0"""
    _finite(a, d, gamma)
    if np.any(np.asarray(a) < 0) or np.any(np.asarray(d) < 0) or gamma < 0:
        raise AggregationError("harmonic aggregation needs non-negative losses and gamma")
    denominator = np.asarray(a + d + gamma, dtype=np.float64)
    safe = np.where(denominator > 0, denominator, 1.0)
    value = np.where(denominator > 0, 2.0 * a * d / safe, 0.0)
    return float(value) if value.ndim == 0 else value


def harmonic_partials(a: Number, d: Number, gamma: float) -> Tuple[Number, Number]:
    """(dg/da, dg/dd) of the harmonic objective"""
    denominator = np.asarray(a + d + gamma, dtype=np.float64) ** 2
    safe = np.where(denominator > 0, denominator, 1.0)
    da = np.where(denominator > 0, 2.0 * d * (d + gamma) / safe, 0.0)
    dd = np.where(denominator > 0, 2.0 * a * (a + gamma) / safe, 0.0)
    return da, dd


def aggregate(spec: AggregationSpec, l_target: Number, neg_log_d: Number) -> Number:
    """Objective value for loss-mixing kinds; hypercone and none report the target loss"""
    if spec.kind == AggregationKind.SUM:
        return sum_objective(l_target, neg_log_d, spec.alpha)
    if spec.kind == AggregationKind.HARMONIC:
        return harmonic_objective(l_target, neg_log_d, spec.gamma)
    return l_target


def hypercone_step(grad_target: np.ndarray, grad_disc: np.ndarray, delta: float) -> Tuple[np.ndarray, bool]:
    """
    Project the discriminator gradient onto the cone around the target gradient

    Args:
        grad_target: gradient of the target loss for one series
        grad_disc: gradient of -log D for the same series
        delta: cone half-angle offset in radians

    Returns:
        (combined gradient, collinear) where collinear marks the grad_target fallback
        taken when the two gradients are (anti)collinear

    Raises:
        DegenerateGradientError: either gradient is zero
    """
    grad_target = np.asarray(grad_target, dtype=np.float64)
    grad_disc = np.asarray(grad_disc, dtype=np.float64)
    norm_t = np.linalg.norm(grad_target)
    norm_d = np.linalg.norm(grad_disc)
    if norm_t == 0.0 or norm_d == 0.0:
        raise DegenerateGradientError("hypercone angle undefined for a zero gradient")

    cos_phi = float(np.clip(np.dot(grad_target.ravel(), grad_disc.ravel()) / (norm_t * norm_d), -1.0, 1.0))
    phi = math.acos(cos_phi)
    if phi < PHI_CLAMP or phi > math.pi - PHI_CLAMP:
        return grad_target.copy(), True

    sin_phi = math.sin(phi)
    scale = math.cos(delta) / sin_phi * math.sin(delta + phi)
    mix = (norm_t / norm_d) * (sin_phi * math.tan(delta) - cos_phi)
    return scale * (grad_target + mix * grad_disc), False


def hypercone_gradient(grad_target: np.ndarray, grad_disc: np.ndarray, delta: float) -> np.ndarray:
    """Combined hypercone gradient; grad_target itself when the two are (anti)collinear"""
    return hypercone_step(grad_target, grad_disc, delta)[0]
