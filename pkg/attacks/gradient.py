"""
Sign-gradient white-box attacks

iFGSM: x^{t+1} = x^t + eps * sign(grad g)
PGD:   x^{t+1} = clip(x^t + lam * sign(grad g), x - eta, x + eta), lam = 2.5 eta / T
"""

from typing import Optional, Tuple

import numpy as np
from loguru import logger

from diffcore import ShapeMismatchError
from models import TrainedClassifier

from .config import AttackConfig, AttackKind
from .objective import objective_gradient, require_discriminator
from .trajectory import AttackTrajectory, SnapshotRecorder


def prepare_inputs(target: TrainedClassifier, x, y) -> Tuple[np.ndarray, np.ndarray]:
    x = np.array(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    if x.ndim != 2 or x.shape[1] != target.spec.input_length:
        raise ShapeMismatchError(f"target expects series of length {target.spec.input_length}, got {x.shape}")
    if y.shape != (x.shape[0],):
        raise ShapeMismatchError(f"{y.shape[0]} labels for {x.shape[0]} series")
    return x, y


def _expect_kind(cfg: AttackConfig, kind: AttackKind) -> None:
    if cfg.kind != kind:
        raise ValueError(f"expected a {kind.value} config, got {cfg.kind.value}")


def _sign_gradient_attack(target: TrainedClassifier, disc: Optional[TrainedClassifier], x, y,
                          cfg: AttackConfig, step: float, radius: Optional[float]) -> AttackTrajectory:
    x, y = prepare_inputs(target, x, y)
    require_discriminator(disc, cfg.aggregation)
    recorder = SnapshotRecorder(x, every=cfg.record_every)
    x_t = x.copy()
    fallbacks = 0
    for t in range(1, cfg.iterations + 1):
        grad, rows = objective_gradient(target, disc, x_t, y, cfg.aggregation)
        fallbacks += rows
        x_t = x_t + step * np.sign(grad)
        if radius is not None:
            x_t = np.clip(x_t, x - radius, x + radius)
        recorder.record(t, x_t)
    if fallbacks:
        logger.warning(f"{cfg.kind.value}: hypercone used the plain target gradient {fallbacks} times "
                       f"(zero or collinear gradient rows)")
    return recorder.build(cfg, queries=np.zeros(x.shape[0], dtype=np.int64), fallbacks=fallbacks)


def ifgsm_attack(target: TrainedClassifier, disc: Optional[TrainedClassifier], x, y,
                 cfg: AttackConfig) -> AttackTrajectory:
    """
    Iterative FGSM on the aggregated objective

    Args:
        target: attacked classifier
        disc: discriminator, required unless cfg.aggregation is none
        x: (n, L) clean series
        y: true labels
        cfg: kind must be ifgsm
    """
    _expect_kind(cfg, AttackKind.IFGSM)
    return _sign_gradient_attack(target, disc, x, y, cfg, step=cfg.eps, radius=None)


def pgd_attack(target: TrainedClassifier, disc: Optional[TrainedClassifier], x, y,
               cfg: AttackConfig) -> AttackTrajectory:
    """PGD in the l-inf ball of radius cfg.eta with step 2.5 * eta / T"""
    _expect_kind(cfg, AttackKind.PGD)
    return _sign_gradient_attack(target, disc, x, y, cfg, step=cfg.pgd_step, radius=cfg.eta)
