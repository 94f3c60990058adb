"""
Experiment configuration

Config files are INI-style sections of `key = value` pairs. Every value is read with
yaml.safe_load, so `[0.01, 0.03]` is a list and `1e-8` a float:

    [experiment]
    name = smoke
    seed = 0

    [attack]
    kind = ifgsm
    eps = 0.03
    iterations = 10

    [grid]
    eps = [0.01, 0.03]
    alpha = [0.1, 1, 10]

Environment: CONCEAL_OUTPUT_ROOT (base of relative output directories) and
CONCEAL_DATA_DIR (base of relative UCR paths).
"""

import configparser
import hashlib
import json
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from attacks import AggregationKind, AttackConfig, AttackKind
from data.synthetic import SyntheticKind
from models import ModelFamily, ModelSpec, TrainConfig

OUTPUT_ROOT_ENV = "CONCEAL_OUTPUT_ROOT"
DATA_DIR_ENV = "CONCEAL_DATA_DIR"

GRID_KEYS = ("kind", "eps", "eta", "iterations", "aggregation", "alpha", "gamma", "delta",
             "sgm_l2", "sgm_smooth", "sgm_coef")


class ConfigError(ValueError):
    """Missing, unreadable or invalid experiment configuration"""


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class DataSource(str, Enum):
    SYNTHETIC = "synthetic"
    UCR = "ucr"


class ExperimentSection(_Section):
    name: str = "experiment"
    seed: int = Field(0, ge=0)


class DataSection(_Section):
    source: DataSource = DataSource.SYNTHETIC
    kind: SyntheticKind = SyntheticKind.TWO_SINE
    n_per_class: int = Field(100, ge=2)
    length: int = Field(64, ge=2)
    noise_std: float = Field(0.3, ge=0.0)
    # synthetic sets are split once into train and test
    test_fraction: float = Field(0.3, gt=0.0, lt=1.0)
    train_path: Optional[str] = None
    test_path: Optional[str] = None
    normalize: bool = True
    # attack only a seeded subsample of the test split
    max_test: Optional[int] = Field(None, ge=2)

    @model_validator(mode="after")
    def _check_paths(self) -> "DataSection":
        if self.source == DataSource.UCR and not (self.train_path and self.test_path):
            raise ValueError("ucr data needs train_path and test_path")
        return self


class TargetSection(_Section):
    family: ModelFamily = ModelFamily.RESCNN
    widths: Tuple[int, ...] = ()
    # None derives one kernel per conv block, (7, 5, 3) for three
    kernel_sizes: Optional[Tuple[int, ...]] = None
    dropout: float = Field(0.0, ge=0.0, lt=1.0)
    epochs: int = Field(30, ge=1)
    batch_size: int = Field(32, ge=1)
    learning_rate: float = Field(1e-2, ge=0.0)
    weight_decay: float = Field(0.0, ge=0.0)
    patience: int = Field(0, ge=0)

    def model_spec(self, n_classes: int, input_length: int) -> ModelSpec:
        return ModelSpec(family=self.family, widths=self.widths, kernel_sizes=self.kernel_sizes,
                         n_classes=n_classes, input_length=input_length, dropout=self.dropout)

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size, learning_rate=self.learning_rate,
                           weight_decay=self.weight_decay, seed=seed, patience=self.patience)


class DiscriminatorSection(TargetSection):
    # None reuses the target family; width_scale None means 0.5 for pgd, 1.0 otherwise
    # kernel_sizes None reuses the target kernel sizes when the block counts match
    family: Optional[ModelFamily] = None
    width_scale: Optional[float] = Field(None, gt=0.0, le=1.0)
    eps_init: Optional[float] = Field(None, gt=0.0)
    decay: float = Field(0.8, gt=0.0, lt=1.0)
    threshold: float = Field(0.9, gt=0.5, le=1.0)
    max_rounds: int = Field(8, ge=1)
    finetune_epochs: int = Field(10, ge=1)
    holdout: float = Field(0.2, gt=0.0, lt=1.0)
    attack_iterations: Optional[int] = Field(None, ge=1)
    # evaluate and regularize with the last discriminator that passed the threshold
    use_last_passing: bool = True


class AttackSection(_Section):
    kind: AttackKind = AttackKind.IFGSM
    eps: float = Field(0.03, gt=0.0)
    iterations: int = Field(10, ge=0)
    eta: Optional[float] = Field(None, gt=0.0)
    sgm_l2: float = Field(0.0, ge=0.0)
    sgm_smooth: float = Field(0.0, ge=0.0)
    aggregation: AggregationKind = AggregationKind.NONE
    alpha: float = Field(1.0, ge=0.0)
    gamma: float = Field(1e-8, gt=0.0)
    delta: float = 0.0
    normalize_gradients: bool = True
    record_every: int = Field(1, ge=1)

    def attack_config(self, seed: int = 0, **overrides: Any) -> AttackConfig:
        """AttackConfig for this section with grid values applied"""
        values = {**self.model_dump(), **overrides}
        coef = values.pop("sgm_coef", None)
        if coef is not None:
            values["sgm_l2"] = values["sgm_smooth"] = coef
        aggregation = {k: values.pop(k) for k in ("alpha", "gamma", "delta", "normalize_gradients")}
        aggregation["kind"] = values.pop("aggregation")
        return AttackConfig(**values, aggregation=aggregation, seed=seed)


class MetricsSection(_Section):
    floors: Dict[AttackKind, int] = Field(default_factory=dict)
    disable_floors: bool = False
    efficiency_escape: float = Field(0.9, ge=0.0, le=1.0)

    def floor_overrides(self) -> Optional[Dict[AttackKind, int]]:
        if self.disable_floors:
            return {kind: 0 for kind in AttackKind}
        return dict(self.floors) or None


class OutputSection(_Section):
    directory: str = "runs"
    workers: int = Field(1, ge=1)
    plots: bool = False
    plot_truncate: Optional[int] = Field(None, ge=1)
    save_adversarial: bool = True


class ExperimentConfig(_Section):
    experiment: ExperimentSection = ExperimentSection()
    data: DataSection = DataSection()
    target_model: TargetSection = TargetSection()
    discriminator: DiscriminatorSection = DiscriminatorSection()
    attack: AttackSection = AttackSection()
    grid: Dict[str, List[Any]] = Field(default_factory=dict)
    metrics: MetricsSection = MetricsSection()
    output: OutputSection = OutputSection()

    @field_validator("grid")
    @classmethod
    def _check_grid(cls, grid: Dict[str, List[Any]]) -> Dict[str, List[Any]]:
        for key, values in grid.items():
            if key not in GRID_KEYS:
                raise ValueError(f"unknown grid key '{key}' (expected one of {', '.join(GRID_KEYS)})")
            if not values:
                raise ValueError(f"grid list '{key}' is empty")
        return grid

    @model_validator(mode="after")
    def _check_attack(self) -> "ExperimentConfig":
        # surfaces invalid kind/aggregation combinations at load time; the full grid is checked on expansion
        self.attack.attack_config(**{key: values[0] for key, values in self.grid.items()})
        return self

    @property
    def seed(self) -> int:
        return self.experiment.seed

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return self.model_copy(update={"experiment": self.experiment.model_copy(update={"seed": seed})})

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """sha256 of the validated config; independent of key order in the file"""
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def _parse_value(raw: str) -> Any:
    try:
        return yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError:
        return raw


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    known = set(ExperimentConfig.model_fields)
    raw: Dict[str, Dict[str, Any]] = {}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"{source}: unknown section [{section}]")
        values = {key: _parse_value(value) for key, value in parser.items(section)}
        if section == "grid":
            values = {k: v if isinstance(v, list) else [v] for k, v in values.items()}
        raw[section] = values
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"{source}: {where}: {first['msg']}") from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def resolve_output_dir(cfg: ExperimentConfig, override: Optional[Union[str, Path]] = None) -> Path:
    """Flag, else config directory (relative ones under CONCEAL_OUTPUT_ROOT), plus the experiment name"""
    if override is not None:
        return Path(override)
    directory = Path(cfg.output.directory)
    root = os.getenv(OUTPUT_ROOT_ENV)
    if root and not directory.is_absolute():
        directory = Path(root) / directory
    return directory / cfg.experiment.name


def resolve_data_path(path: str) -> Path:
    resolved = Path(path)
    base = os.getenv(DATA_DIR_ENV)
    if base and not resolved.is_absolute():
        resolved = Path(base) / resolved
    return resolved
