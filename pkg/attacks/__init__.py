"""
Vanilla and discriminator-regularized attacks on series classifiers
"""

from .aggregation import (
    AggregationError,
    AggregationKind,
    AggregationSpec,
    DegenerateGradientError,
    aggregate,
    clamp_disc_score,
    harmonic_objective,
    harmonic_partials,
    hypercone_gradient,
    hypercone_step,
    sum_objective,
)
from .config import GRADIENT_KINDS, AttackConfig, AttackKind, with_strength
from .dispatch import run_attack
from .gradient import ifgsm_attack, pgd_attack
from .objective import MissingDiscriminatorError, neg_log_disc, objective_gradient, unit_rows
from .sgm import sgm_attack
from .simba import simba_attack
from .trajectory import AttackTrajectory

__all__ = [
    'AggregationKind', 'AggregationSpec', 'AggregationError', 'DegenerateGradientError',
    'sum_objective', 'harmonic_objective', 'harmonic_partials', 'hypercone_gradient', 'hypercone_step', 'aggregate',
    'clamp_disc_score', 'AttackKind', 'AttackConfig', 'GRADIENT_KINDS', 'with_strength',
    'AttackTrajectory', 'MissingDiscriminatorError', 'objective_gradient', 'neg_log_disc', 'unit_rows',
    'ifgsm_attack', 'pgd_attack', 'simba_attack', 'sgm_attack', 'run_attack',
]
