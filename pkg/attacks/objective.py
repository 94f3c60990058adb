"""
Input gradients of the (possibly concealed) attack objective
"""

from typing import Optional, Tuple

import numpy as np
from loguru import logger
from scipy.special import log_softmax

from models import TrainedClassifier

from .aggregation import (
    AggregationKind,
    AggregationSpec,
    DegenerateGradientError,
    clamp_neg_log_d,
    harmonic_partials,
    hypercone_step,
)

PERTURBED = 1


class MissingDiscriminatorError(ValueError):
    """A regularized attack was configured without a discriminator"""


def require_discriminator(disc: Optional[TrainedClassifier], aggregation: AggregationSpec) -> None:
    if aggregation.regularized and disc is None:
        raise MissingDiscriminatorError(f"{aggregation.kind.value} aggregation needs a trained discriminator")


def target_losses(target: TrainedClassifier, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-row cross-entropy of the target model, no gradient"""
    return -log_softmax(target.logits(x), axis=1)[np.arange(x.shape[0]), y]


def neg_log_disc(disc: TrainedClassifier, x: np.ndarray) -> np.ndarray:
    """-log D(x) per row with D clamped to [1e-7, 1 - 1e-7]"""
    return clamp_neg_log_d(-log_softmax(disc.logits(x), axis=1)[:, PERTURBED])


def disc_terms(disc: TrainedClassifier, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Clamped -log D(x) and its input gradient
    The gradient is taken through the unclamped fused cross-entropy against label 1.
    """
    neg_log_d, grad = disc.loss_and_input_gradient(x, np.full(x.shape[0], PERTURBED))
    return clamp_neg_log_d(neg_log_d), grad


def unit_rows(grad: np.ndarray) -> np.ndarray:
    """Scale every row to unit l2 norm; all-zero rows stay zero"""
    norms = np.linalg.norm(grad.reshape(grad.shape[0], -1), axis=1)
    norms = np.where(norms > 0.0, norms, 1.0)
    return grad / norms.reshape((-1,) + (1,) * (grad.ndim - 1))


def combine_gradients(aggregation: AggregationSpec, a: np.ndarray, grad_a: np.ndarray,
                      d: Optional[np.ndarray], grad_d: Optional[np.ndarray]) -> Tuple[np.ndarray, int]:
    """
    Gradient of g(a, d) from the gradients of its two terms

    Returns:
        (gradient, number of rows where hypercone fell back to grad_a: a zero
        gradient or (anti)collinear gradients)
    """
    kind = aggregation.kind
    if kind == AggregationKind.NONE:
        return grad_a, 0
    if kind == AggregationKind.SUM:
        if aggregation.normalize_gradients:
            return unit_rows(grad_a) + aggregation.alpha * unit_rows(grad_d), 0
        return grad_a + aggregation.alpha * grad_d, 0
    if kind == AggregationKind.HARMONIC:
        da, dd = harmonic_partials(a, d, aggregation.gamma)
        return da[:, None] * grad_a + dd[:, None] * grad_d, 0

    combined = np.empty_like(grad_a)
    fallbacks = 0
    for row in range(grad_a.shape[0]):
        try:
            combined[row], collinear = hypercone_step(grad_a[row], grad_d[row], aggregation.delta)
        except DegenerateGradientError:
            combined[row], collinear = grad_a[row], True
        fallbacks += int(collinear)
    return combined, fallbacks


def objective_gradient(target: TrainedClassifier, disc: Optional[TrainedClassifier], x: np.ndarray,
                       y: np.ndarray, aggregation: AggregationSpec) -> Tuple[np.ndarray, int]:
    """Ascent direction of g(L_target(f(x), y), -log D(x)) with respect to x"""
    a, grad_a = target.loss_and_input_gradient(x, y)
    if not aggregation.regularized:
        return grad_a, 0
    require_discriminator(disc, aggregation)
    d, grad_d = disc_terms(disc, x)
    grad, fallbacks = combine_gradients(aggregation, a, grad_a, d, grad_d)
    if fallbacks:
        logger.debug(f"hypercone fell back to the target gradient on {fallbacks} rows")
    return grad, fallbacks
