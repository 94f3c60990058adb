"""
Seed derivation: every stage and grid combination gets its own stream
derived from the experiment seed, so runs are reproducible yet decorrelated.
"""

import numpy as np

STAGES = {
    "data": 0,
    "split": 1,
    "target": 2,
    "discriminator": 3,
    "subsample": 4,
}
COMBINATION_OFFSET = 1000


def derive_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([int(base), int(index)]).generate_state(1)[0])


def stage_seed(base: int, stage: str) -> int:
    return derive_seed(base, STAGES[stage])


def combination_seed(base: int, index: int) -> int:
    return derive_seed(base, COMBINATION_OFFSET + index)
