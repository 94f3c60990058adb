"""
Discriminator datasets and curriculum training
"""

from .curriculum import (
    CurriculumConfig,
    CurriculumResult,
    CurriculumRound,
    curriculum_attack,
    curriculum_train,
    disc_accuracy,
    disc_score,
)
from .dataset import ORIGINAL, PERTURBED, AdversarialDataset, AttackNotVanillaError, build_adversarial_dataset

__all__ = [
    'AdversarialDataset', 'AttackNotVanillaError', 'build_adversarial_dataset', 'ORIGINAL', 'PERTURBED',
    'CurriculumConfig', 'CurriculumRound', 'CurriculumResult', 'curriculum_train', 'curriculum_attack',
    'disc_score', 'disc_accuracy',
]
