"""
Balanced original-vs-perturbed datasets for discriminator training
Originals are labeled 0, their attacked counterparts 1.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from attacks import AttackConfig, run_attack
from data.series import LabeledSeriesSet
from models import TrainedClassifier

ORIGINAL = 0
PERTURBED = 1


class AttackNotVanillaError(ValueError):
    """Discriminators are trained on non-regularized attacks only"""


@dataclass(frozen=True, eq=False)
class AdversarialDataset:
    """
    features: (2n, L), originals first, then the final attack snapshot of each row in the same order
    labels: n zeros followed by n ones
    """
    features: np.ndarray
    labels: np.ndarray
    attack: AttackConfig
    name: str = "adversarial"

    @property
    def n_original(self) -> int:
        return self.features.shape[0] // 2

    @property
    def originals(self) -> np.ndarray:
        return self.features[:self.n_original]

    @property
    def perturbed(self) -> np.ndarray:
        return self.features[self.n_original:]

    def as_series_set(self) -> LabeledSeriesSet:
        return LabeledSeriesSet(features=self.features, labels=self.labels, name=self.name, n_classes=2)


def build_adversarial_dataset(target: TrainedClassifier, attack_cfg: AttackConfig,
                              originals: LabeledSeriesSet) -> AdversarialDataset:
    """
    Attack every original with the vanilla attack and stack clean and perturbed rows

    Raises:
        AttackNotVanillaError: attack_cfg carries an aggregation
    """
    if not attack_cfg.vanilla:
        raise AttackNotVanillaError(
            f"discriminator data needs a vanilla attack, got {attack_cfg.aggregation.kind.value} aggregation"
        )
    trajectory = run_attack(target, None, originals.features, originals.labels, attack_cfg)
    n = originals.n
    dataset = AdversarialDataset(
        features=np.vstack([originals.features, trajectory.final]),
        labels=np.r_[np.full(n, ORIGINAL), np.full(n, PERTURBED)].astype(np.int64),
        attack=attack_cfg,
        name=f"{originals.name}/{attack_cfg.kind.value}@{attack_cfg.strength:.6g}",
    )
    logger.debug(f"Built {dataset.name}: {2 * n} rows, mean |delta| = "
                 f"{np.abs(dataset.perturbed - dataset.originals).mean():.4g}")
    return dataset
