"""
Command line interface

    python main.py train-target --config configs/smoke.cfg
    python main.py train-disc   --config configs/smoke.cfg
    python main.py attack       --config configs/smoke.cfg
    python main.py evaluate     --config configs/smoke.cfg
    python main.py grid         --config configs/acceptance.cfg --seed 1
    python main.py plot         --run runs/acceptance --truncate 50

Exit codes: 0 success, 1 any error (one-line diagnostic on stderr), 2 usage errors.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from loguru import logger

from data import load_ucr_tsv, save_ucr_tsv
from metrics import MetricRow, select_best_iteration, successfulness
from models import load_parameters, save_parameters

from .config import ExperimentConfig, load_config, resolve_output_dir
from .grid import grid_search
from .logging_setup import configure_logging
from .pipeline import (
    TARGET_FILE,
    TEST_FILE,
    base_combination,
    chosen_discriminator,
    prepare_data,
    run_pipeline,
    target_spec,
    train_discriminator,
    train_target,
)
from .plots import emit_plot
from .records import read_results_csv, write_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conceal", description="Concealed adversarial attacks on series classifiers")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
        p.add_argument("--config", required=config_required, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override [experiment] seed")
        p.add_argument("--out", default=None, help="run directory (overrides config and CONCEAL_OUTPUT_ROOT)")
        p.add_argument("--log-level", default=None, help="console log level (default: LOG_LEVEL or INFO)")

    add_common(sub.add_parser("train-target", help="train the target classifier"))
    add_common(sub.add_parser("train-disc", help="curriculum-train the discriminator for the [attack] kind"))
    add_common(sub.add_parser("attack", help="run the [attack] section, reusing saved models"))
    add_common(sub.add_parser("evaluate", help="recompute selections from a run's results.csv"))
    add_common(sub.add_parser("grid", help="run the full [grid]"))
    plot = sub.add_parser("plot", help="overlay original and attacked series of a finished run")
    add_common(plot, config_required=False)
    plot.add_argument("--run", default=None, help="run directory (default: the config's run directory)")
    plot.add_argument("--truncate", type=int, default=None, help="plot only the first N points")
    plot.add_argument("--series", type=int, default=0, help="row of the test set to draw")
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config)
    return cfg.with_seed(args.seed) if args.seed is not None else cfg


def cmd_train_target(args: argparse.Namespace) -> int:
    cfg = _config(args)
    out_dir = resolve_output_dir(cfg, args.out)
    splits = prepare_data(cfg)
    target = train_target(cfg, splits.train)
    save_parameters(target, out_dir / TARGET_FILE)
    save_ucr_tsv(splits.test, out_dir / TEST_FILE)
    accuracy = float((target.predict(splits.test.features) == splits.test.labels).mean())
    print(f"target: {target.spec.family.value}, {target.n_parameters} parameters, test accuracy {accuracy:.4f}")
    return 0


def cmd_train_disc(args: argparse.Namespace) -> int:
    cfg = _config(args)
    out_dir = resolve_output_dir(cfg, args.out)
    splits = prepare_data(cfg)
    target_path = out_dir / TARGET_FILE
    if target_path.exists():
        target = load_parameters(target_spec(cfg, splits.train), target_path)
    else:
        target = train_target(cfg, splits.train)
        save_parameters(target, target_path)
    attack = base_combination(cfg).attack
    result = train_discriminator(cfg, target, splits.train, attack)
    save_parameters(chosen_discriminator(cfg, result), out_dir / f"disc_{attack.kind.value}.json")
    write_json(result.summary(), out_dir / f"curriculum_{attack.kind.value}.json")
    for r in result.rounds:
        print(f"round {r.index}: strength {r.strength:.6g}  held-out accuracy {r.accuracy:.4f}"
              f"{'' if r.passed else '  (below threshold)'}")
    return 0


def _print_summary(rows: List[dict], limit: int = 10) -> None:
    print(f"{'label':<28}{'iter':>7}{'E':>9}{'C':>9}{'S':>9}  reason")
    for row in rows[:limit]:
        print(f"{row['label']:<28}{row['selected_iteration']:>7}{row['E']:>9.4f}{row['C']:>9.4f}"
              f"{row['S']:>9.4f}  {row['selection_reason']}")


def cmd_attack(args: argparse.Namespace) -> int:
    cfg = _config(args)
    record = run_pipeline(cfg, resolve_output_dir(cfg, args.out), reuse_models=True)
    _print_summary(record.summary_rows())
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    cfg = _config(args)
    _print_summary(grid_search(cfg, resolve_output_dir(cfg, args.out)))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Re-derive S and the selected iteration of every combination from results.csv"""
    cfg = _config(args)
    out_dir = resolve_output_dir(cfg, args.out)
    results_path = out_dir / "results.csv"
    if not results_path.is_file():
        raise FileNotFoundError(f"no results.csv in {out_dir}; run 'attack' or 'grid' first")
    frame = read_results_csv(results_path)
    rows = []
    for (index, label), group in frame.groupby(["combination", "label"], sort=True):
        kind = str(label).split("_")[1]
        metric_rows = [MetricRow(iteration=int(r.iteration), efficiency=float(r.E), concealability=float(r.C),
                                 successfulness=successfulness(float(r.C), float(r.E)))
                       for r in group.itertuples(index=False)]
        selection = select_best_iteration(metric_rows, kind, cfg.metrics.floor_overrides(),
                                          cfg.metrics.efficiency_escape)
        best = metric_rows[selection.index]
        stored = float(group["S"].iloc[selection.index])
        if abs(stored - best.successfulness) > 1e-12:
            logger.warning(f"[{label}] stored S {stored} differs from recomputed {best.successfulness}")
        rows.append({"combination": int(index), "label": label, "kind": kind,
                     "selected_iteration": best.iteration, "selection_reason": selection.reason.value,
                     "E": best.efficiency, "C": best.concealability, "S": best.successfulness})
    rows.sort(key=lambda r: (-r["S"], r["combination"]))
    write_json({"combinations": rows}, out_dir / "evaluation.json")
    _print_summary(rows)
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    if args.run is not None:
        run_dir = Path(args.run)
    elif args.config is not None:
        run_dir = resolve_output_dir(_config(args), args.out)
    else:
        raise ValueError("plot needs --run or --config")
    original = load_ucr_tsv(run_dir / TEST_FILE)
    attacked_files = sorted(run_dir.glob("adversarial_*.tsv"))
    if not attacked_files:
        raise FileNotFoundError(f"no adversarial_*.tsv files in {run_dir}")
    if not 0 <= args.series < original.n:
        raise ValueError(f"--series must lie in [0, {original.n})")
    for path in attacked_files:
        attacked = load_ucr_tsv(path, label_mapping=original.label_mapping)
        label = path.stem[len("adversarial_"):]
        written = emit_plot(original.features[args.series], attacked.features[args.series],
                            run_dir / f"plot_{label}.svg", truncate=args.truncate, title=label)
        print(written)
    return 0


COMMANDS = {
    "train-target": cmd_train_target,
    "train-disc": cmd_train_disc,
    "attack": cmd_attack,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "plot": cmd_plot,
}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130
    except Exception as exc:
        logger.debug(f"{args.command} failed: {exc!r}")
        print(f"error: {exc}", file=sys.stderr)
        return 1
