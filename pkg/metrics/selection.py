"""
Choosing the reported iteration of an attack run

A row qualifies when its iteration reaches the floor of its attack kind or when
its efficiency already exceeds the escape level. Among qualifying rows the one
with the highest successfulness wins, earliest first on ties.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

from loguru import logger

from attacks import AttackKind

from .scores import MetricInputError

DEFAULT_FLOORS = {
    AttackKind.IFGSM: 40,
    AttackKind.PGD: 40,
    AttackKind.SIMBA: 1300,
    AttackKind.SGM: 400,
}
EFFICIENCY_ESCAPE = 0.9


class SelectionReason(str, Enum):
    ITERATION_FLOOR = "iteration_floor"
    EFFICIENCY_ESCAPE = "efficiency_escape"
    FLOOR_UNMET = "floor_unmet"


@dataclass(frozen=True)
class MetricRow:
    iteration: int
    efficiency: float
    concealability: float
    successfulness: float


@dataclass(frozen=True)
class Selection:
    index: int
    reason: SelectionReason


def iteration_floor(kind: AttackKind, floors: Optional[Mapping] = None) -> int:
    kind = AttackKind(kind)
    if floors is None:
        return DEFAULT_FLOORS[kind]
    # config files key floors by the plain attack name
    return int(floors.get(kind, floors.get(kind.value, DEFAULT_FLOORS[kind])))


def select_best_iteration(rows: Sequence[MetricRow], kind: AttackKind, floors: Optional[Mapping] = None,
                          efficiency_escape: float = EFFICIENCY_ESCAPE) -> Selection:
    """
    Index of the reported row

    Args:
        rows: per-iteration metrics in iteration order
        kind: attack kind, picks the iteration floor
        floors: per-kind overrides of the default floors (0 disables a floor)
        efficiency_escape: rows with a larger efficiency qualify regardless of the floor

    Returns:
        Selection; with no qualifying row, the last row flagged floor_unmet
    """
    if not rows:
        raise MetricInputError("cannot select an iteration from an empty report")
    floor = iteration_floor(kind, floors)

    best: Optional[int] = None
    for i, row in enumerate(rows):
        if row.iteration >= floor or row.efficiency > efficiency_escape:
            if best is None or row.successfulness > rows[best].successfulness:
                best = i

    if best is None:
        logger.warning(f"No {AttackKind(kind).value} iteration reached the floor of {floor} "
                       f"(last recorded: {rows[-1].iteration}); reporting the last one")
        return Selection(index=len(rows) - 1, reason=SelectionReason.FLOOR_UNMET)
    reason = SelectionReason.ITERATION_FLOOR if rows[best].iteration >= floor else SelectionReason.EFFICIENCY_ESCAPE
    return Selection(index=best, reason=reason)
