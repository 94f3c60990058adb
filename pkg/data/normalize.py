"""
Global z-normalization with statistics frozen on the training set
"""

from dataclasses import replace
from typing import Iterable, List, Tuple

from .series import LabeledSeriesSet, NormalizationStats

STD_FLOOR = 1e-8


def compute_stats(train: LabeledSeriesSet) -> NormalizationStats:
    return NormalizationStats(mean=float(train.features.mean()),
                              std=max(float(train.features.std()), STD_FLOOR))


def apply_normalization(dataset: LabeledSeriesSet, stats: NormalizationStats) -> LabeledSeriesSet:
    """Apply the given statistics; applying twice normalizes twice"""
    return replace(dataset, features=(dataset.features - stats.mean) / stats.std, stats=stats)


def zscore_normalize(train: LabeledSeriesSet,
                     others: Iterable[LabeledSeriesSet] = ()) -> Tuple[LabeledSeriesSet, List[LabeledSeriesSet]]:
    stats = compute_stats(train)
    return apply_normalization(train, stats), [apply_normalization(other, stats) for other in others]
