"""
Iterative discriminator training with decreasing attack strength

    eps = eps_init
    train D on originals + attack_eps(originals)
    while held-out accuracy of D > threshold and rounds < max_rounds:
        eps = decay * eps
        finetune D on originals + attack_eps(originals)

The loop follows that order exactly, so the last round may leave D trained on a level
it fails on. The result therefore also keeps the discriminator of the last passing round.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from attacks import AttackConfig, clamp_disc_score
from data.series import LabeledSeriesSet, split_holdout
from models import ModelSpec, TrainConfig, TrainedClassifier, build, fit

from .dataset import PERTURBED, AdversarialDataset, build_adversarial_dataset


class CurriculumConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    eps_init: float = Field(0.03, gt=0.0)
    decay: float = Field(0.8, gt=0.0, lt=1.0)
    threshold: float = Field(0.9, gt=0.5, le=1.0)
    max_rounds: int = Field(8, ge=1)
    train: TrainConfig = TrainConfig(epochs=30)
    finetune_epochs: int = Field(10, ge=1)
    holdout: float = Field(0.2, gt=0.0, lt=1.0)
    # None halves the evaluation attack's iteration count
    attack_iterations: Optional[int] = Field(None, ge=1)
    # width multiplier relative to the target architecture (e.g. 0.5 for pgd)
    width_scale: float = Field(1.0, gt=0.0, le=1.0)
    seed: int = 0

    def strength_at(self, round_index: int) -> float:
        return self.eps_init * self.decay ** round_index


@dataclass(frozen=True)
class CurriculumRound:
    index: int
    strength: float
    accuracy: float
    passed: bool


@dataclass(eq=False)
class CurriculumResult:
    """
    Args:
        discriminator: model after the final round (trained on schedule[-1])
        schedule: attack strength of every round, geometric with ratio decay
        rounds: per-round held-out accuracy
        last_passing_discriminator: model of the last round above the threshold
    """
    discriminator: TrainedClassifier
    schedule: List[float]
    rounds: List[CurriculumRound]
    last_passing_discriminator: Optional[TrainedClassifier] = None
    last_passing_strength: Optional[float] = None
    first_failed_strength: Optional[float] = None
    converged: bool = True
    holdout_sets: List[AdversarialDataset] = field(default_factory=list, repr=False)

    @property
    def robust_discriminator(self) -> TrainedClassifier:
        """Last discriminator that cleared the threshold, else the final one"""
        return self.last_passing_discriminator or self.discriminator

    @property
    def accuracies(self) -> List[float]:
        return [r.accuracy for r in self.rounds]

    def holdout_accuracies(self, disc: Optional[TrainedClassifier] = None) -> List[float]:
        """Accuracy of disc (default the robust one) on the held-out data of every round"""
        disc = disc or self.robust_discriminator
        return [disc_accuracy(disc, holdout) for holdout in self.holdout_sets]

    def score_gap(self, disc: Optional[TrainedClassifier] = None) -> float:
        """Mean disc score of perturbed minus original rows in the final round's held-out data"""
        disc = disc or self.robust_discriminator
        holdout = self.holdout_sets[-1]
        scores = disc_score(disc, holdout.features)
        perturbed = holdout.labels == PERTURBED
        return float(scores[perturbed].mean() - scores[~perturbed].mean())

    def summary(self) -> dict:
        return {
            "schedule": list(self.schedule),
            "accuracies": self.accuracies,
            "retained_accuracies": self.holdout_accuracies(),
            "score_gap": self.score_gap(),
            "last_passing_strength": self.last_passing_strength,
            "first_failed_strength": self.first_failed_strength,
            "converged": self.converged,
        }


def disc_score(disc: TrainedClassifier, x) -> np.ndarray:
    """Probability that each series was perturbed, clamped to [1e-7, 1 - 1e-7]"""
    return clamp_disc_score(disc.predict_proba(x)[:, PERTURBED])


def disc_accuracy(disc: TrainedClassifier, dataset: AdversarialDataset) -> float:
    return float(np.mean(disc.predict(dataset.features) == dataset.labels))


def curriculum_attack(attack_cfg: AttackConfig, cfg: CurriculumConfig) -> AttackConfig:
    """Vanilla attack used to generate training data: fewer iterations, strength eps_init"""
    iterations = cfg.attack_iterations or max(1, attack_cfg.iterations // 2)
    update = {"iterations": iterations, "aggregation": {"kind": "none"}}
    base = AttackConfig.model_validate({**attack_cfg.model_dump(), **update})
    return base.with_strength(cfg.eps_init)


def curriculum_train(disc_spec: ModelSpec, originals: LabeledSeriesSet, target: TrainedClassifier,
                     attack_cfg: AttackConfig, cfg: CurriculumConfig) -> CurriculumResult:
    """
    Train a discriminator following the decreasing-strength curriculum

    Args:
        disc_spec: discriminator architecture (n_classes is forced to 2, widths scaled by cfg.width_scale)
        originals: clean series the target was trained on
        target: attacked classifier
        attack_cfg: evaluation attack; its vanilla, shortened form generates the data
        cfg: curriculum settings
    """
    spec = disc_spec.model_copy(update={"n_classes": 2}).scaled(cfg.width_scale)
    train_part, holdout_part = split_holdout(originals, cfg.holdout, cfg.seed)
    base_attack = curriculum_attack(attack_cfg, cfg)

    def level(round_index: int):
        attack = base_attack.with_strength(cfg.strength_at(round_index))
        return (build_adversarial_dataset(target, attack, train_part),
                build_adversarial_dataset(target, attack, holdout_part))

    schedule: List[float] = []
    rounds: List[CurriculumRound] = []
    holdouts: List[AdversarialDataset] = []
    disc: Optional[TrainedClassifier] = None
    last_passing: Optional[TrainedClassifier] = None
    last_passing_strength = first_failed_strength = None

    round_index = 0
    while True:
        strength = cfg.strength_at(round_index)
        train_set, holdout_set = level(round_index)
        if disc is None:
            disc = fit(build(spec, seed=cfg.seed), train_set.as_series_set(), cfg.train)
        else:
            finetune = cfg.train.model_copy(update={"epochs": cfg.finetune_epochs, "seed": cfg.train.seed + round_index})
            disc = fit(disc, train_set.as_series_set(), finetune)
        accuracy = disc_accuracy(disc, holdout_set)
        passed = accuracy > cfg.threshold
        schedule.append(strength)
        holdouts.append(holdout_set)
        rounds.append(CurriculumRound(index=round_index, strength=strength, accuracy=accuracy, passed=passed))
        logger.info(f"Curriculum round {round_index}: strength={strength:.6g} held-out accuracy={accuracy:.4f}")

        if passed:
            last_passing, last_passing_strength = disc, strength
        else:
            first_failed_strength = strength
            break
        if len(schedule) >= cfg.max_rounds:
            break
        round_index += 1

    converged = rounds[0].passed
    if not converged:
        logger.warning(f"Discriminator reached only {rounds[0].accuracy:.4f} held-out accuracy at the initial "
                       f"strength {schedule[0]:.6g} (threshold {cfg.threshold})")
    return CurriculumResult(
        discriminator=disc,
        schedule=schedule,
        rounds=rounds,
        last_passing_discriminator=last_passing,
        last_passing_strength=last_passing_strength,
        first_failed_strength=first_failed_strength,
        converged=converged,
        holdout_sets=holdouts,
    )
