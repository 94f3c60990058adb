"""
Hyperparameter grid search over attack settings
"""

import itertools
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from loguru import logger
from pydantic import ValidationError

from attacks import AggregationKind, AttackConfig, AttackKind

from .config import ConfigError, ExperimentConfig
from .pipeline import Combination, run_combinations
from .seeds import combination_seed

# grid keys that only act on some attacks; anything else always applies
RELEVANT_WHEN = {
    "alpha": lambda a: a.aggregation.kind == AggregationKind.SUM,
    "gamma": lambda a: a.aggregation.kind == AggregationKind.HARMONIC,
    "delta": lambda a: a.aggregation.kind == AggregationKind.HYPERCONE,
    "eta": lambda a: a.kind == AttackKind.PGD,
    "sgm_l2": lambda a: a.kind == AttackKind.SGM,
    "sgm_smooth": lambda a: a.kind == AttackKind.SGM,
    "sgm_coef": lambda a: a.kind == AttackKind.SGM,
}


def effective_params(params: Dict[str, Any], attack: AttackConfig) -> Dict[str, Any]:
    """Grid values that change the attack; e.g. alpha is dropped for vanilla and harmonic rows"""
    return {k: v for k, v in params.items() if RELEVANT_WHEN.get(k, lambda a: True)(attack)}


def expand_grid(cfg: ExperimentConfig) -> List[Combination]:
    """
    Cartesian product of the [grid] lists applied over the [attack] section

    Keys keep their order in the file; the last key varies fastest. Points that differ only
    in keys their attack ignores are run once, under the first point's position. An empty
    grid yields the [attack] section as the single combination.
    """
    keys = list(cfg.grid)
    combinations = []
    seen = set()
    skipped = 0
    for point, values in enumerate(itertools.product(*(cfg.grid[k] for k in keys))):
        params: Dict[str, Any] = dict(zip(keys, values))
        try:
            candidate = cfg.attack.attack_config(**params)
        except (ValidationError, TypeError) as exc:
            raise ConfigError(f"grid combination {point} {params} is invalid: {exc}") from exc
        params = effective_params(params, candidate)
        key: Tuple = tuple(sorted((k, repr(v)) for k, v in params.items()))
        if key in seen:
            skipped += 1
            continue
        seen.add(key)
        index = len(combinations)
        attack = cfg.attack.attack_config(seed=combination_seed(cfg.seed, index), **params)
        combinations.append(Combination(index=index, params=params, attack=attack))
    if not combinations:
        raise ConfigError("the grid expands to no combination")
    if skipped:
        logger.info(f"Skipped {skipped} grid point(s) that repeat an earlier combination")
    logger.info(f"Grid over {keys or ['(attack section)']}: {len(combinations)} combination(s)")
    return combinations


def grid_search(cfg: ExperimentConfig, out_dir: Optional[Path] = None,
                reuse_models: bool = False) -> List[Dict[str, Any]]:
    """
    Run every grid combination with a shared target and one discriminator per attack kind

    Returns:
        Per-combination summaries, best successfulness first
    """
    record = run_combinations(cfg, expand_grid(cfg), out_dir, reuse_models)
    return record.summary_rows()
