"""
Per-iteration E/C/S report of one attack run
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np
import pandas as pd
from loguru import logger

from attacks import AttackKind, AttackTrajectory
from models import TrainedClassifier

from .scores import MetricInputError, concealability, efficiency, successfulness
from .selection import EFFICIENCY_ESCAPE, MetricRow, Selection, SelectionReason, select_best_iteration

COLUMNS = ["iteration", "E", "C", "S"]


@dataclass(frozen=True, eq=False)
class MetricsReport:
    kind: AttackKind
    rows: List[MetricRow]
    selected: int
    reason: SelectionReason

    @property
    def best(self) -> MetricRow:
        return self.rows[self.selected]

    @property
    def selected_iteration(self) -> int:
        return self.best.iteration

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.iteration, r.efficiency, r.concealability, r.successfulness) for r in self.rows],
            columns=COLUMNS,
        )

    def summary(self) -> Dict:
        best = self.best
        return {
            "kind": self.kind.value,
            "selected_iteration": best.iteration,
            "selection_reason": self.reason.value,
            "E": best.efficiency,
            "C": best.concealability,
            "S": best.successfulness,
        }


def build_report(kind: AttackKind, rows: List[MetricRow], floors: Optional[Mapping] = None,
                 efficiency_escape: float = EFFICIENCY_ESCAPE) -> MetricsReport:
    selection: Selection = select_best_iteration(rows, kind, floors, efficiency_escape)
    return MetricsReport(kind=AttackKind(kind), rows=list(rows), selected=selection.index, reason=selection.reason)


def evaluate_trajectory(target: TrainedClassifier, disc: TrainedClassifier, trajectory: AttackTrajectory,
                        y_true, floors: Optional[Mapping] = None,
                        efficiency_escape: float = EFFICIENCY_ESCAPE) -> MetricsReport:
    """
    Score every recorded iteration after the clean snapshot

    Args:
        target: attacked classifier (efficiency)
        disc: evaluation discriminator (concealability)
        trajectory: attack run; snapshot 0 is the clean input
        y_true: true labels of the attacked series
        floors: per-kind iteration floors, None for the defaults
    """
    if len(trajectory) < 2:
        raise MetricInputError("the attack recorded no iteration beyond the clean input")
    y_true = np.asarray(y_true)
    clean = trajectory.original
    rows = []
    for iteration, x_t in zip(trajectory.iterations[1:], trajectory.snapshots[1:]):
        e = efficiency(target, x_t, y_true)
        c = concealability(disc, clean, x_t)
        rows.append(MetricRow(iteration=int(iteration), efficiency=e, concealability=c,
                              successfulness=successfulness(c, e)))
    report = build_report(trajectory.config.kind, rows, floors, efficiency_escape)
    best = report.best
    logger.debug(f"{report.kind.value}: iteration {best.iteration} selected ({report.reason.value}) "
                 f"E={best.efficiency:.4f} C={best.concealability:.4f} S={best.successfulness:.4f}")
    return report
