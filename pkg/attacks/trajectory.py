"""
Per-iteration record of an attack run
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .config import AttackConfig


@dataclass(eq=False)
class AttackTrajectory:
    """
    snapshots[0] is the clean input x; snapshots[k] is x^t with t = iterations[k]

    Args:
        config: the attack configuration that produced the run
        snapshots: perturbed feature matrices, all shaped like x
        iterations: attack iteration of each snapshot
        queries: model queries spent per series (simba probes)
        true_class_probs: p_f(y | x^t) per snapshot (simba only)
        fallbacks: rows where hypercone aggregation fell back to the target gradient
    """
    config: AttackConfig
    snapshots: List[np.ndarray]
    iterations: List[int]
    queries: np.ndarray
    true_class_probs: Optional[List[np.ndarray]] = None
    fallbacks: int = 0

    @property
    def original(self) -> np.ndarray:
        return self.snapshots[0]

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]

    @property
    def total_queries(self) -> int:
        return int(self.queries.sum())

    def __len__(self) -> int:
        return len(self.snapshots)

    def at_iteration(self, iteration: int) -> np.ndarray:
        return self.snapshots[self.iterations.index(iteration)]

    def max_deviation(self) -> np.ndarray:
        """l-inf distance from x for every snapshot"""
        return np.array([np.abs(s - self.original).max() for s in self.snapshots])


@dataclass
class SnapshotRecorder:
    """Collects every `every`-th snapshot plus the last one"""
    x: np.ndarray
    every: int = 1
    snapshots: List[np.ndarray] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)
    probs: List[np.ndarray] = field(default_factory=list)
    _pending: Optional[tuple] = None

    def __post_init__(self):
        self.snapshots.append(self.x.copy())
        self.iterations.append(0)

    def record(self, iteration: int, x_t: np.ndarray, probs: Optional[np.ndarray] = None) -> None:
        if iteration % self.every == 0:
            self.snapshots.append(x_t.copy())
            self.iterations.append(iteration)
            if probs is not None:
                self.probs.append(probs.copy())
            self._pending = None
        else:
            self._pending = (iteration, x_t.copy(), None if probs is None else probs.copy())

    def build(self, config: AttackConfig, queries: np.ndarray, initial_probs: Optional[np.ndarray] = None,
              fallbacks: int = 0) -> AttackTrajectory:
        if self._pending is not None:
            iteration, x_t, probs = self._pending
            self.snapshots.append(x_t)
            self.iterations.append(iteration)
            if probs is not None:
                self.probs.append(probs)
            self._pending = None
        probs = None
        if initial_probs is not None:
            probs = [initial_probs.copy()] + self.probs
        return AttackTrajectory(config=config, snapshots=self.snapshots, iterations=self.iterations,
                                queries=queries, true_class_probs=probs, fallbacks=fallbacks)
