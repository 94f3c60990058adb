"""
Efficiency, concealability and successfulness of attacks
"""

from .report import COLUMNS, MetricsReport, build_report, evaluate_trajectory
from .scores import (
    Averaging,
    MetricInputError,
    concealability,
    disc_predictions,
    efficiency,
    f1,
    successfulness,
)
from .selection import (
    DEFAULT_FLOORS,
    EFFICIENCY_ESCAPE,
    MetricRow,
    Selection,
    SelectionReason,
    iteration_floor,
    select_best_iteration,
)

__all__ = [
    'Averaging', 'MetricInputError', 'f1', 'efficiency', 'concealability', 'successfulness', 'disc_predictions',
    'DEFAULT_FLOORS', 'EFFICIENCY_ESCAPE', 'MetricRow', 'Selection', 'SelectionReason', 'iteration_floor',
    'select_best_iteration', 'COLUMNS', 'MetricsReport', 'build_report', 'evaluate_trajectory',
]
