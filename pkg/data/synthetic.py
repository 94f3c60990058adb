"""
Synthetic desk-scale datasets
two_sine: class 0 = sin(2*pi*t/L), class 1 = sin(4*pi*t/L), plus Gaussian noise
warped_bump: a Gaussian bump early (class 0) or late (class 1) with jittered position
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .series import LabeledSeriesSet


class SyntheticKind(str, Enum):
    TWO_SINE = "two_sine"
    WARPED_BUMP = "warped_bump"


class SyntheticSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SyntheticKind = SyntheticKind.TWO_SINE
    n_per_class: int = Field(100, ge=2)
    length: int = Field(64, ge=2)
    noise_std: float = Field(0.3, ge=0.0)
    seed: int = 0


def class_templates(kind: SyntheticKind, length: int) -> np.ndarray:
    """Noise-free class means, shape (2, L); warped_bump uses the unjittered positions"""
    t = np.arange(length, dtype=np.float64)
    if kind == SyntheticKind.TWO_SINE:
        return np.stack([np.sin(2.0 * np.pi * t / length), np.sin(4.0 * np.pi * t / length)])
    width = length / 12.0
    centers = (length / 3.0, 2.0 * length / 3.0)
    return np.stack([np.exp(-0.5 * ((t - c) / width) ** 2) for c in centers])


def generate_synthetic(spec: SyntheticSpec) -> LabeledSeriesSet:
    rng = np.random.default_rng(spec.seed)
    n, length = spec.n_per_class, spec.length
    labels = np.repeat(np.arange(2), n)

    if spec.kind == SyntheticKind.TWO_SINE:
        clean = class_templates(spec.kind, length)[labels]
    else:
        t = np.arange(length, dtype=np.float64)
        width = length / 12.0
        base = np.where(labels == 0, length / 3.0, 2.0 * length / 3.0)
        centers = base + rng.uniform(-length / 16.0, length / 16.0, size=labels.shape[0])
        clean = np.exp(-0.5 * ((t[None, :] - centers[:, None]) / width) ** 2)

    noise = rng.normal(0.0, spec.noise_std, size=clean.shape)
    return LabeledSeriesSet(
        features=clean + noise,
        labels=labels,
        name=f"{spec.kind.value}-seed{spec.seed}",
        n_classes=2,
    )
