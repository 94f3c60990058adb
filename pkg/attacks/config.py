"""
Attack hyperparameters
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .aggregation import AggregationKind, AggregationSpec


class AttackKind(str, Enum):
    IFGSM = "ifgsm"
    PGD = "pgd"
    SIMBA = "simba"
    SGM = "sgm"


GRADIENT_KINDS = (AttackKind.IFGSM, AttackKind.PGD)


class AttackConfig(BaseModel):
    """
    eps: step size for ifgsm and simba, clipping radius for sgm
    iterations: T for gradient attacks and sgm, T_max (query budget) for simba
    eta: l-inf radius for pgd; the step is 2.5 * eta / T
    record_every: keep every k-th snapshot (the first and last are always kept)
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: AttackKind = AttackKind.IFGSM
    eps: float = Field(0.03, gt=0.0)
    iterations: int = Field(10, ge=0)
    eta: Optional[float] = Field(None, gt=0.0)
    sgm_l2: float = Field(0.0, ge=0.0)
    sgm_smooth: float = Field(0.0, ge=0.0)
    aggregation: AggregationSpec = AggregationSpec()
    seed: int = 0
    record_every: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_combination(self) -> "AttackConfig":
        if self.iterations < 1 and self.kind != AttackKind.SIMBA:
            raise ValueError(f"{self.kind.value} needs at least one iteration")
        if self.kind == AttackKind.PGD and self.eta is None:
            raise ValueError("pgd needs an l-inf radius eta")
        if self.aggregation.kind == AggregationKind.HYPERCONE and self.kind not in GRADIENT_KINDS:
            raise ValueError("hypercone aggregation mixes gradients and only applies to ifgsm and pgd")
        return self

    @property
    def vanilla(self) -> bool:
        return not self.aggregation.regularized

    @property
    def pgd_step(self) -> float:
        return 2.5 * self.eta / self.iterations

    @property
    def strength(self) -> float:
        """The value the curriculum decays: eta for pgd, eps otherwise"""
        return self.eta if self.kind == AttackKind.PGD else self.eps

    def with_strength(self, value: float) -> "AttackConfig":
        field = "eta" if self.kind == AttackKind.PGD else "eps"
        return AttackConfig.model_validate({**self.model_dump(), field: value})


def with_strength(cfg: AttackConfig, value: float) -> AttackConfig:
    return cfg.with_strength(value)
