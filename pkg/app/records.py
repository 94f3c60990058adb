"""
Run records and their on-disk form

results.csv   per-iteration E/C/S of every grid combination
summary.json  selected iterations, curriculum schedules and the config echo
timing.json   wall-clock per stage, kept apart so the other files stay byte-identical
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from metrics import COLUMNS, MetricsReport

FLOAT_FORMAT = "%.17g"
INCOMPLETE_MARKER = "INCOMPLETE"


@dataclass(eq=False)
class CombinationResult:
    index: int
    label: str
    params: Dict[str, Any]
    seed: int
    report: MetricsReport
    queries: int = 0
    fallbacks: int = 0

    def summary(self) -> Dict[str, Any]:
        return {
            "combination": self.index,
            "label": self.label,
            "params": self.params,
            "seed": self.seed,
            "queries": self.queries,
            "hypercone_fallbacks": self.fallbacks,
            **self.report.summary(),
        }


@dataclass(eq=False)
class RunRecord:
    config_hash: str
    config: Dict[str, Any]
    combinations: List[CombinationResult]
    curricula: Dict[str, Optional[Dict[str, Any]]] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    artifacts: Dict[str, str] = field(default_factory=dict)
    complete: bool = True

    @property
    def wall_clock(self) -> float:
        return float(sum(self.timings.values()))

    def summary_rows(self) -> List[Dict[str, Any]]:
        """Combinations ordered by selected successfulness, best first"""
        rows = [c.summary() for c in self.combinations]
        return sorted(rows, key=lambda r: (-r["S"], r["combination"]))

    def results_frame(self) -> pd.DataFrame:
        frames = []
        for combination in sorted(self.combinations, key=lambda c: c.index):
            frame = combination.report.to_frame()
            frame.insert(0, "label", combination.label)
            frame.insert(0, "combination", combination.index)
            frames.append(frame)
        if not frames:
            return pd.DataFrame(columns=["combination", "label"] + COLUMNS)
        return pd.concat(frames, ignore_index=True)

    def summary(self) -> Dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "config": self.config,
            "curricula": self.curricula,
            "combinations": self.summary_rows(),
            "complete": self.complete,
        }


def write_json(payload: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_results_csv(record: RunRecord, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    record.results_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_results_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_record(record: RunRecord, out_dir: Path) -> RunRecord:
    """Write results.csv, summary.json and timing.json and note them as artifacts"""
    record.artifacts["results"] = str(write_results_csv(record, out_dir / "results.csv"))
    record.artifacts["summary"] = str(write_json(record.summary(), out_dir / "summary.json"))
    record.artifacts["timing"] = str(write_json({"stages": record.timings, "total": record.wall_clock},
                                                out_dir / "timing.json"))
    return record


def mark_incomplete(out_dir: Path, stage: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / INCOMPLETE_MARKER).write_text(f"{stage}\n", encoding="utf-8")


def clear_incomplete(out_dir: Path) -> None:
    marker = out_dir / INCOMPLETE_MARKER
    if marker.exists():
        marker.unlink()
