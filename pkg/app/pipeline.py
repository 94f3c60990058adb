"""
End-to-end experiment pipeline

    data -> target -> discriminator (curriculum, one per attack kind) -> attack -> metrics -> persist

Every stage error is re-raised as PipelineStageError naming the stage; the run
directory keeps an INCOMPLETE marker naming the last stage entered until the run finishes.
"""

import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

from attacks import AttackConfig, AttackKind, run_attack
from data import (
    LabeledSeriesSet,
    SyntheticSpec,
    generate_synthetic,
    load_ucr_tsv,
    save_ucr_tsv,
    split_holdout,
    zscore_normalize,
)
from discriminator import CurriculumConfig, CurriculumResult, curriculum_train
from metrics import evaluate_trajectory
from models import ModelSpec, TrainConfig, TrainedClassifier, build, fit, load_parameters, save_parameters

from .config import DataSource, ExperimentConfig, resolve_data_path, resolve_output_dir
from .logging_setup import add_run_log
from .plots import emit_plot
from .records import CombinationResult, RunRecord, clear_incomplete, mark_incomplete, write_record
from .seeds import combination_seed, derive_seed, stage_seed

TARGET_FILE = "target.json"
TEST_FILE = "test_original.tsv"


class PipelineStageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass(frozen=True)
class Splits:
    train: LabeledSeriesSet
    test: LabeledSeriesSet


@dataclass(frozen=True)
class Combination:
    index: int
    params: Dict[str, Any]
    attack: AttackConfig

    @property
    def label(self) -> str:
        return f"{self.index:03d}_{self.attack.kind.value}_{self.attack.aggregation.kind.value}"


@dataclass
class StageTimer:
    out_dir: Optional[Path] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        if self.out_dir is not None:
            mark_incomplete(self.out_dir, name)
        logger.info(f"Stage: {name}")
        start = time.perf_counter()
        try:
            yield
        except PipelineStageError:
            raise
        except Exception as exc:
            logger.error(f"Stage '{name}' failed: {exc}")
            raise PipelineStageError(name, exc) from exc
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start


def prepare_data(cfg: ExperimentConfig) -> Splits:
    """Train/test splits, z-normalized with training statistics"""
    section = cfg.data
    if section.source == DataSource.SYNTHETIC:
        raw = generate_synthetic(SyntheticSpec(kind=section.kind, n_per_class=section.n_per_class,
                                               length=section.length, noise_std=section.noise_std,
                                               seed=stage_seed(cfg.seed, "data")))
        train, test = split_holdout(raw, section.test_fraction, stage_seed(cfg.seed, "split"))
    else:
        train = load_ucr_tsv(resolve_data_path(section.train_path))
        test = load_ucr_tsv(resolve_data_path(section.test_path), label_mapping=train.label_mapping)
    if train.length != test.length:
        raise ValueError(f"train series have length {train.length}, test series {test.length}")
    if section.normalize:
        train, (test,) = zscore_normalize(train, [test])
    if section.max_test is not None and test.n > section.max_test:
        rng = np.random.default_rng(stage_seed(cfg.seed, "subsample"))
        test = test.subset(np.sort(rng.choice(test.n, section.max_test, replace=False)))
    logger.info(f"Data: {train.n} train / {test.n} test series of length {train.length}, {train.n_classes} classes")
    return Splits(train=train, test=test)


def target_spec(cfg: ExperimentConfig, train: LabeledSeriesSet) -> ModelSpec:
    return cfg.target_model.model_spec(n_classes=train.n_classes, input_length=train.length)


def train_target(cfg: ExperimentConfig, train: LabeledSeriesSet) -> TrainedClassifier:
    seed = stage_seed(cfg.seed, "target")
    model = fit(build(target_spec(cfg, train), seed=seed), train, cfg.target_model.train_config(seed))
    logger.info(f"Target trained: train F1 {model.history[-1].f1:.4f}")
    return model


def discriminator_spec(cfg: ExperimentConfig, target: ModelSpec) -> ModelSpec:
    section = cfg.discriminator
    family = section.family or target.family
    same_family = family == target.family
    widths = section.widths or (target.widths if same_family else ())
    kernel_sizes = section.kernel_sizes
    if kernel_sizes is None and same_family and len(target.kernel_sizes) == len(widths):
        kernel_sizes = target.kernel_sizes
    return ModelSpec(family=family, widths=widths, kernel_sizes=kernel_sizes, n_classes=2,
                     input_length=target.input_length, dropout=section.dropout)


def curriculum_config(cfg: ExperimentConfig, attack: AttackConfig) -> CurriculumConfig:
    """Curriculum settings for one attack kind; smaller discriminators for pgd unless configured"""
    section = cfg.discriminator
    seed = derive_seed(stage_seed(cfg.seed, "discriminator"), list(AttackKind).index(attack.kind))
    width_scale = section.width_scale or (0.5 if attack.kind == AttackKind.PGD else 1.0)
    return CurriculumConfig(
        eps_init=section.eps_init or attack.strength,
        decay=section.decay,
        threshold=section.threshold,
        max_rounds=section.max_rounds,
        train=TrainConfig(epochs=section.epochs, batch_size=section.batch_size, learning_rate=section.learning_rate,
                          weight_decay=section.weight_decay, seed=seed, patience=section.patience),
        finetune_epochs=section.finetune_epochs,
        holdout=section.holdout,
        attack_iterations=section.attack_iterations,
        width_scale=width_scale,
        seed=seed,
    )


def train_discriminator(cfg: ExperimentConfig, target: TrainedClassifier, train: LabeledSeriesSet,
                        attack: AttackConfig) -> CurriculumResult:
    result = curriculum_train(discriminator_spec(cfg, target.spec), train, target, attack,
                              curriculum_config(cfg, attack))
    logger.info(f"Discriminator for {attack.kind.value}: schedule {[f'{s:.4g}' for s in result.schedule]}, "
                f"accuracies {[f'{a:.3f}' for a in result.accuracies]}")
    return result


def chosen_discriminator(cfg: ExperimentConfig, result: CurriculumResult) -> TrainedClassifier:
    return result.robust_discriminator if cfg.discriminator.use_last_passing else result.discriminator


def attack_combination(cfg: ExperimentConfig, target: TrainedClassifier, disc: TrainedClassifier,
                       test: LabeledSeriesSet, combination: Combination) -> Tuple[CombinationResult, np.ndarray]:
    """Run one attack and score it; returns the result and the selected snapshot"""
    attack = combination.attack
    regularizer = None if attack.vanilla else disc
    trajectory = run_attack(target, regularizer, test.features, test.labels, attack)
    report = evaluate_trajectory(target, disc, trajectory, test.labels, cfg.metrics.floor_overrides(),
                                 cfg.metrics.efficiency_escape)
    result = CombinationResult(
        index=combination.index,
        label=combination.label,
        params=combination.params,
        seed=attack.seed,
        report=report,
        queries=trajectory.total_queries,
        fallbacks=trajectory.fallbacks,
    )
    best = report.best
    logger.debug(f"[{combination.label}] iteration {best.iteration}: "
                 f"E={best.efficiency:.4f} C={best.concealability:.4f} S={best.successfulness:.4f}")
    return result, trajectory.at_iteration(report.selected_iteration)


def fan_out(fn: Callable[[Combination], Any], combinations: List[Combination], workers: int) -> Iterable[Any]:
    """Yield fn(c) for every combination as it completes; a single consumer handles the results"""
    progress = dict(total=len(combinations), desc="combinations", disable=len(combinations) < 2)
    if workers == 1:
        yield from tqdm(map(fn, combinations), **progress)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, combination) for combination in combinations]
        for future in tqdm(as_completed(futures), **progress):
            yield future.result()


def base_combination(cfg: ExperimentConfig) -> Combination:
    return Combination(index=0, params={}, attack=cfg.attack.attack_config(seed=combination_seed(cfg.seed, 0)))


def _load_or_train_target(cfg: ExperimentConfig, splits: Splits, out_dir: Path, reuse: bool) -> TrainedClassifier:
    path = out_dir / TARGET_FILE
    if reuse and path.exists():
        logger.info(f"Reusing target parameters from {path}")
        return load_parameters(target_spec(cfg, splits.train), path)
    target = train_target(cfg, splits.train)
    save_parameters(target, path)
    return target


def _discriminators(cfg: ExperimentConfig, target: TrainedClassifier, train: LabeledSeriesSet,
                    combinations: List[Combination], out_dir: Path,
                    reuse: bool) -> Tuple[Dict[AttackKind, TrainedClassifier], Dict[str, Optional[Dict]]]:
    discs: Dict[AttackKind, TrainedClassifier] = {}
    curricula: Dict[str, Optional[Dict]] = {}
    kinds = sorted({c.attack.kind for c in combinations}, key=list(AttackKind).index)
    for kind in kinds:
        path = out_dir / f"disc_{kind.value}.json"
        strongest = max((c.attack for c in combinations if c.attack.kind == kind), key=lambda a: a.strength)
        if reuse and path.exists():
            scale = curriculum_config(cfg, strongest).width_scale
            discs[kind] = load_parameters(discriminator_spec(cfg, target.spec).scaled(scale), path)
            curricula[kind.value] = None
            logger.info(f"Reusing {kind.value} discriminator from {path}")
            continue
        result = train_discriminator(cfg, target, train, strongest)
        discs[kind] = chosen_discriminator(cfg, result)
        curricula[kind.value] = result.summary()
        if curricula[kind.value]["score_gap"] <= 0.0:
            logger.warning(f"{kind.value} discriminator scores perturbed held-out series no higher than originals")
        save_parameters(discs[kind], path)
    return discs, curricula


def run_combinations(cfg: ExperimentConfig, combinations: List[Combination], out_dir: Optional[Path] = None,
                     reuse_models: bool = False) -> RunRecord:
    """
    Execute the pipeline for a list of attack combinations sharing one target

    Args:
        cfg: validated experiment config
        combinations: attacks to run, indexed from 0
        out_dir: run directory (defaults to the configured one)
        reuse_models: load target/discriminator parameters already present in out_dir

    Returns:
        RunRecord with one CombinationResult per combination, in index order
    """
    if not combinations:
        raise ValueError("nothing to run: the combination list is empty")
    out_dir = resolve_output_dir(cfg, out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sink = add_run_log(out_dir / "run.log")
    timer = StageTimer(out_dir)
    try:
        logger.info(f"Run '{cfg.experiment.name}' ({len(combinations)} combination(s)) -> {out_dir}")
        with timer.stage("data"):
            splits = prepare_data(cfg)
            save_ucr_tsv(splits.test, out_dir / TEST_FILE)
        with timer.stage("target"):
            target = _load_or_train_target(cfg, splits, out_dir, reuse_models)
        with timer.stage("discriminator"):
            discs, curricula = _discriminators(cfg, target, splits.train, combinations, out_dir, reuse_models)

        results: List[CombinationResult] = []
        with timer.stage("attack"):
            def job(combination: Combination):
                return attack_combination(cfg, target, discs[combination.attack.kind], splits.test, combination)

            for result, snapshot in fan_out(job, combinations, cfg.output.workers):
                _write_combination_artifacts(cfg, splits.test, result, snapshot, out_dir)
                results.append(result)

        with timer.stage("persist"):
            record = RunRecord(
                config_hash=cfg.config_hash(),
                config=cfg.model_dump(mode="json"),
                combinations=sorted(results, key=lambda r: r.index),
                curricula=curricula,
                timings=timer.timings,
                artifacts={"directory": str(out_dir)},
            )
            write_record(record, out_dir)
        clear_incomplete(out_dir)
        best = record.summary_rows()[0]
        logger.info(f"Run finished in {record.wall_clock:.1f}s; best {best['label']}: S={best['S']:.4f}")
        return record
    finally:
        logger.remove(sink)


def _write_combination_artifacts(cfg: ExperimentConfig, test: LabeledSeriesSet, result: CombinationResult,
                                 snapshot: np.ndarray, out_dir: Path) -> None:
    if cfg.output.save_adversarial:
        adversarial = test.with_features(snapshot, name=f"adversarial_{result.label}")
        save_ucr_tsv(adversarial, out_dir / f"adversarial_{result.label}.tsv")
    if cfg.output.plots:
        emit_plot(test.features[0], snapshot[0], out_dir / f"plot_{result.label}.svg",
                  truncate=cfg.output.plot_truncate,
                  title=f"{result.label}, iteration {result.report.selected_iteration}")


def run_pipeline(cfg: ExperimentConfig, out_dir: Optional[Path] = None, reuse_models: bool = False) -> RunRecord:
    """Run the [attack] section as a single combination"""
    return run_combinations(cfg, [base_combination(cfg)], out_dir, reuse_models)
