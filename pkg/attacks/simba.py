"""
SimBA black-box attack over the Cartesian basis of time points

Each iteration picks, per series, a time point not yet used in the current pass
and probes x + eps*e_q, then x - eps*e_q. The first probe that strictly lowers the
true-class probability is kept. With a sum or harmonic aggregation the probe must
instead strictly raise g(CE_target, -log D). A series stops once it is misclassified.
"""

from typing import Optional

import numpy as np
from loguru import logger
from scipy.special import log_softmax

from models import TrainedClassifier

from .aggregation import aggregate
from .config import AttackConfig, AttackKind
from .gradient import prepare_inputs
from .objective import neg_log_disc, require_discriminator
from .trajectory import AttackTrajectory, SnapshotRecorder


class _ProbeScorer:
    """Higher is better: -p_y for the vanilla attack, the aggregated objective otherwise"""

    def __init__(self, target: TrainedClassifier, disc: Optional[TrainedClassifier], y: np.ndarray,
                 cfg: AttackConfig):
        self.target = target
        self.disc = disc
        self.y = y
        self.aggregation = cfg.aggregation
        self.rows = np.arange(y.shape[0])

    def __call__(self, x: np.ndarray):
        log_probs = log_softmax(self.target.logits(x), axis=1)
        true_log_prob = log_probs[self.rows, self.y]
        p_y = np.exp(true_log_prob)
        predicted = np.argmax(log_probs, axis=1)
        if not self.aggregation.regularized:
            return -p_y, p_y, predicted
        score = aggregate(self.aggregation, -true_log_prob, neg_log_disc(self.disc, x))
        return np.asarray(score, dtype=np.float64), p_y, predicted


def simba_attack(target: TrainedClassifier, x, y, cfg: AttackConfig,
                 disc: Optional[TrainedClassifier] = None) -> AttackTrajectory:
    """
    Args:
        target: attacked classifier, queried for probabilities only
        x: (n, L) clean series
        y: true labels
        cfg: kind simba; cfg.iterations is the budget T_max (0 allowed), cfg.eps the step
        disc: discriminator for sum/harmonic aggregation

    Returns:
        AttackTrajectory with per-series query counts and p_y per snapshot
    """
    if cfg.kind != AttackKind.SIMBA:
        raise ValueError(f"expected a simba config, got {cfg.kind.value}")
    x, y = prepare_inputs(target, x, y)
    require_discriminator(disc, cfg.aggregation)
    n, length = x.shape
    rng = np.random.default_rng(cfg.seed)
    score_of = _ProbeScorer(target, disc, y, cfg)

    x_adv = x.copy()
    score, p_y, predicted = score_of(x_adv)
    initial_p_y = p_y.copy()
    active = predicted == y
    queries = np.zeros(n, dtype=np.int64)
    recorder = SnapshotRecorder(x, every=cfg.record_every)
    order = np.empty((n, length), dtype=np.int64)

    for t in range(cfg.iterations):
        if not active.any():
            logger.debug(f"simba: every series misclassified after {t} iterations")
            break
        position = t % length
        if position == 0:
            # without replacement within a pass over the time points
            order = rng.permuted(np.tile(np.arange(length), (n, 1)), axis=1)
        coords = order[:, position]
        accepted = np.zeros(n, dtype=bool)
        for sign in (1.0, -1.0):
            probing = active & ~accepted
            if not probing.any():
                break
            candidate = x_adv.copy()
            rows = np.flatnonzero(probing)
            candidate[rows, coords[rows]] += sign * cfg.eps
            queries[rows] += 1
            new_score, new_p_y, new_predicted = score_of(candidate)
            better = probing & (new_score > score)
            x_adv[better] = candidate[better]
            score[better] = new_score[better]
            p_y[better] = new_p_y[better]
            predicted[better] = new_predicted[better]
            accepted |= better
        active &= predicted == y
        recorder.record(t + 1, x_adv, p_y)

    return recorder.build(cfg, queries=queries, initial_probs=initial_p_y)
