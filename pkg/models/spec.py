"""
Architecture and training configuration for the desk-scale classifiers
"""

from enum import Enum
from typing import Any, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

DEFAULT_WIDTHS = {
    "mlp": (32,),
    "rescnn": (16, 32, 32),
    "recurrent": (16,),
}


def default_kernel_sizes(n_blocks: int) -> Tuple[int, ...]:
    """(7, 5, 3) for three blocks; fewer blocks drop the wide kernels, more repeat 7"""
    return ((7,) * n_blocks + (5, 3))[-n_blocks:]


class ModelFamily(str, Enum):
    MLP = "mlp"
    RESCNN = "rescnn"
    RECURRENT = "recurrent"


class ModelSpec(BaseModel):
    """
    Classifier architecture

    widths are hidden sizes (mlp), conv channels per block (rescnn) or the
    hidden state size (recurrent, exactly one entry)
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: ModelFamily = ModelFamily.MLP
    widths: Tuple[int, ...] = ()
    kernel_sizes: Tuple[int, ...] = (7, 5, 3)
    n_classes: int = Field(2, ge=2)
    input_length: int = Field(..., ge=1)
    dropout: float = Field(0.0, ge=0.0, lt=1.0)

    @model_validator(mode="before")
    @classmethod
    def _default_widths(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("widths"):
            family = data.get("family", ModelFamily.MLP)
            family = family.value if isinstance(family, ModelFamily) else str(family)
            data = {**data, "widths": DEFAULT_WIDTHS.get(family, (32,))}
        if isinstance(data, dict) and data.get("kernel_sizes") is None:
            widths = data["widths"]
            n_blocks = len(widths) if isinstance(widths, (list, tuple)) else 3
            data = {**data, "kernel_sizes": default_kernel_sizes(n_blocks)}
        return data

    @model_validator(mode="after")
    def _check_layers(self) -> "ModelSpec":
        if not self.widths:
            raise ValueError("at least one hidden layer is required")
        if min(self.widths) < 1:
            raise ValueError(f"layer widths must be positive, got {list(self.widths)}")
        if self.family == ModelFamily.RESCNN:
            if len(self.kernel_sizes) != len(self.widths):
                raise ValueError("rescnn needs one kernel size per conv block")
            if any(k < 1 or k % 2 == 0 for k in self.kernel_sizes):
                raise ValueError(f"kernel sizes must be odd, got {list(self.kernel_sizes)}")
        if self.family == ModelFamily.RECURRENT and len(self.widths) != 1:
            raise ValueError("the recurrent proxy has a single gated layer")
        return self

    def scaled(self, width_scale: float) -> "ModelSpec":
        """Same architecture with every width multiplied (at least 1 unit per layer)"""
        if width_scale == 1.0:
            return self
        widths = tuple(max(1, int(round(w * width_scale))) for w in self.widths)
        return self.model_copy(update={"widths": widths})


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = Field(30, ge=1)
    batch_size: int = Field(32, ge=1)
    # zero is accepted and leaves the parameters untouched
    learning_rate: float = Field(1e-2, ge=0.0)
    weight_decay: float = Field(0.0, ge=0.0)
    seed: int = 0
    # 0 disables early stopping
    patience: int = Field(0, ge=0)
