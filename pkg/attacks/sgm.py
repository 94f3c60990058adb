"""
Smooth-perturbation baseline: sign ascent on

    KL(f(x) || f(x + delta)) - l2 * ||delta||^2 - smooth * sum_t sqrt((delta_{t+1} - delta_t)^2 + knee^2)

with delta clipped to [-eps, eps] after every step of size eps / 10.
The KL gradient vanishes at delta = 0, so delta starts from seeded noise of scale 1e-3 * eps.
"""

from typing import Optional

import numpy as np

from models import TrainedClassifier

from .config import AttackConfig, AttackKind
from .gradient import prepare_inputs
from .objective import combine_gradients, disc_terms, require_discriminator
from .trajectory import AttackTrajectory, SnapshotRecorder

SMOOTH_KNEE = 1e-6
STEP_FRACTION = 0.1
START_SCALE = 1e-3


def smoothness_penalty(delta: np.ndarray) -> np.ndarray:
    """Smoothed fused-lasso term per row"""
    diff = np.diff(delta, axis=1)
    return np.sqrt(diff * diff + SMOOTH_KNEE ** 2).sum(axis=1)


def smoothness_gradient(delta: np.ndarray) -> np.ndarray:
    diff = np.diff(delta, axis=1)
    slope = diff / np.sqrt(diff * diff + SMOOTH_KNEE ** 2)
    grad = np.zeros_like(delta)
    grad[:, 1:] += slope
    grad[:, :-1] -= slope
    return grad


def sgm_attack(target: TrainedClassifier, x, y, cfg: AttackConfig,
               disc: Optional[TrainedClassifier] = None) -> AttackTrajectory:
    """
    Args:
        target: attacked classifier
        x: (n, L) clean series
        y: true labels (validated; the KL objective is untargeted)
        cfg: kind sgm; eps is the clipping radius, sgm_l2 / sgm_smooth the penalties
        disc: discriminator for sum/harmonic aggregation of the KL term with -log D
    """
    if cfg.kind != AttackKind.SGM:
        raise ValueError(f"expected an sgm config, got {cfg.kind.value}")
    x, y = prepare_inputs(target, x, y)
    require_discriminator(disc, cfg.aggregation)
    rng = np.random.default_rng(cfg.seed)
    reference = target.predict_proba(x)
    step = STEP_FRACTION * cfg.eps

    delta = rng.uniform(-START_SCALE * cfg.eps, START_SCALE * cfg.eps, size=x.shape)
    recorder = SnapshotRecorder(x, every=cfg.record_every)
    for t in range(1, cfg.iterations + 1):
        x_t = x + delta
        kl, grad = target.kl_and_input_gradient(x_t, reference)
        if cfg.aggregation.regularized:
            d, grad_d = disc_terms(disc, x_t)
            grad, _ = combine_gradients(cfg.aggregation, kl, grad, d, grad_d)
        grad = grad - 2.0 * cfg.sgm_l2 * delta - cfg.sgm_smooth * smoothness_gradient(delta)
        delta = np.clip(delta + step * np.sign(grad), -cfg.eps, cfg.eps)
        recorder.record(t, x + delta)

    return recorder.build(cfg, queries=np.zeros(x.shape[0], dtype=np.int64))
