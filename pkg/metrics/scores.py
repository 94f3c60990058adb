"""
Attack quality scores

Efficiency      E = 1 - macro F1 of the target on attacked series
Concealability  C = 1 - F1 (class 1) of the discriminator on clean + attacked series
Successfulness  S = 2 C E / (C + E)
"""

from enum import Enum
from typing import Optional, Sequence

import numpy as np
from sklearn.metrics import f1_score

from discriminator import ORIGINAL, PERTURBED, disc_score
from models import TrainedClassifier

DECISION_THRESHOLD = 0.5


class MetricInputError(ValueError):
    """Empty, mismatched or out-of-range metric inputs"""


class Averaging(str, Enum):
    BINARY_POS1 = "binary_pos1"
    MACRO = "macro"


def _labels(values, name: str) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 1:
        raise MetricInputError(f"{name} must be one-dimensional, got shape {array.shape}")
    if array.size == 0:
        raise MetricInputError(f"{name} is empty")
    if not np.issubdtype(array.dtype, np.integer):
        if not np.all(np.isfinite(array)) or not np.all(array == np.round(array)):
            raise MetricInputError(f"{name} must hold integer class labels")
        array = array.astype(np.int64)
    if array.min() < 0:
        raise MetricInputError(f"{name} contains negative labels")
    return array


def f1(y_true, y_pred, averaging: Averaging = Averaging.MACRO,
       labels: Optional[Sequence[int]] = None) -> float:
    """
    F1 score

    Args:
        y_true: true labels
        y_pred: predicted labels, same length
        averaging: macro (unweighted mean over the classes present in either array,
            a class without true support scores 0) or binary_pos1 (F1 of class 1)
        labels: classes to average over for macro; defaults to those present

    Returns:
        float in [0, 1]
    """
    y_true = _labels(y_true, "y_true")
    y_pred = _labels(y_pred, "y_pred")
    if y_true.shape != y_pred.shape:
        raise MetricInputError(f"length mismatch: {y_true.shape[0]} true vs {y_pred.shape[0]} predicted labels")
    averaging = Averaging(averaging)
    if averaging == Averaging.BINARY_POS1:
        score = f1_score(y_true, y_pred, labels=[PERTURBED], average="macro", zero_division=0)
    else:
        score = f1_score(y_true, y_pred, labels=labels, average="macro", zero_division=0)
    return float(score)


def efficiency(target: TrainedClassifier, x_adv, y_true) -> float:
    """1 - macro F1 of the target's predictions on the attacked series"""
    x_adv = np.asarray(x_adv, dtype=np.float64)
    y_true = _labels(y_true, "y_true")
    if x_adv.ndim != 2 or x_adv.shape[0] != y_true.shape[0]:
        raise MetricInputError(f"expected ({y_true.shape[0]}, L) attacked series, got {x_adv.shape}")
    return 1.0 - f1(y_true, target.predict(x_adv), Averaging.MACRO)


def disc_predictions(disc: TrainedClassifier, x) -> np.ndarray:
    """Score above 0.5 means perturbed; exactly 0.5 counts as original"""
    return np.where(disc_score(disc, x) > DECISION_THRESHOLD, PERTURBED, ORIGINAL)


def concealability(disc: TrainedClassifier, x_clean, x_adv) -> float:
    """1 - F1 of class 1 on the balanced set (clean -> 0, attacked -> 1)"""
    x_clean = np.asarray(x_clean, dtype=np.float64)
    x_adv = np.asarray(x_adv, dtype=np.float64)
    if x_clean.shape != x_adv.shape:
        raise MetricInputError(f"clean {x_clean.shape} and attacked {x_adv.shape} sets differ in size")
    if x_clean.shape[0] == 0:
        raise MetricInputError("no series to evaluate")
    n = x_clean.shape[0]
    truth = np.r_[np.full(n, ORIGINAL), np.full(n, PERTURBED)]
    predicted = disc_predictions(disc, np.vstack([x_clean, x_adv]))
    return 1.0 - f1(truth, predicted, Averaging.BINARY_POS1)


def successfulness(concealability_score: float, efficiency_score: float) -> float:
    """Harmonic mean of C and E; 0 when both are 0"""
    for name, value in (("concealability", concealability_score), ("efficiency", efficiency_score)):
        if not np.isfinite(value) or not 0.0 <= value <= 1.0:
            raise MetricInputError(f"{name} must lie in [0, 1], got {value}")
    total = concealability_score + efficiency_score
    if total == 0.0:
        return 0.0
    return 2.0 * concealability_score * efficiency_score / total
