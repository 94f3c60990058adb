"""
Single entry point for every attack kind
"""

from typing import Optional

from models import TrainedClassifier

from .config import AttackConfig, AttackKind
from .gradient import ifgsm_attack, pgd_attack
from .sgm import sgm_attack
from .simba import simba_attack
from .trajectory import AttackTrajectory


def run_attack(target: TrainedClassifier, disc: Optional[TrainedClassifier], x, y,
               cfg: AttackConfig) -> AttackTrajectory:
    if cfg.kind == AttackKind.IFGSM:
        return ifgsm_attack(target, disc, x, y, cfg)
    if cfg.kind == AttackKind.PGD:
        return pgd_attack(target, disc, x, y, cfg)
    if cfg.kind == AttackKind.SIMBA:
        return simba_attack(target, x, y, cfg, disc=disc)
    return sgm_attack(target, x, y, cfg, disc=disc)
