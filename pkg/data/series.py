"""
Labeled univariate series sets shared by training, attacks and evaluation
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import train_test_split


class EmptyDatasetError(ValueError):
    """A series set must hold at least one row"""


@dataclass(frozen=True)
class NormalizationStats:
    """Global z-score statistics computed on a training set"""
    mean: float
    std: float


@dataclass(frozen=True, eq=False)
class LabeledSeriesSet:
    """
    n series of equal length L with integer class labels in [0, n_classes)
    label_mapping records original label text -> contiguous index when loaded from a file
    """
    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    n_classes: Optional[int] = None
    label_mapping: Dict[str, int] = field(default_factory=dict)
    stats: Optional[NormalizationStats] = None

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim == 1:
            features = features.reshape(1, -1)
        if features.ndim != 2 or features.shape[0] == 0 or features.shape[1] == 0:
            raise EmptyDatasetError(f"{self.name}: expected a non-empty (n, L) matrix, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ValueError(f"{self.name}: {labels.shape[0]} labels for {features.shape[0]} series")
        if labels.min() < 0:
            raise ValueError(f"{self.name}: labels must be non-negative")
        n_classes = self.n_classes if self.n_classes is not None else max(int(labels.max()) + 1, 2)
        if labels.max() >= n_classes:
            raise ValueError(f"{self.name}: label {int(labels.max())} outside [0, {n_classes})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", int(n_classes))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def length(self) -> int:
        return self.features.shape[1]

    def with_features(self, features: np.ndarray, name: Optional[str] = None) -> "LabeledSeriesSet":
        return replace(self, features=features, name=name or self.name)

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> "LabeledSeriesSet":
        indices = np.asarray(indices, dtype=np.int64)
        return replace(self, features=self.features[indices], labels=self.labels[indices], name=name or self.name)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def split_holdout(dataset: LabeledSeriesSet, holdout_fraction: float,
                  seed: int) -> Tuple[LabeledSeriesSet, LabeledSeriesSet]:
    """Seeded, stratified split into (train, holdout)"""
    indices = np.arange(dataset.n)
    counts = dataset.class_counts()
    stratify = dataset.labels if counts[counts > 0].min() >= 2 else None
    train_idx, holdout_idx = train_test_split(
        indices, test_size=holdout_fraction, random_state=seed, stratify=stratify
    )
    return (dataset.subset(np.sort(train_idx), f"{dataset.name}/train"),
            dataset.subset(np.sort(holdout_idx), f"{dataset.name}/holdout"))
