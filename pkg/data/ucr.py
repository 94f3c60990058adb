"""
UCR archive TSV reader and writer
One series per line, tab separated, class label in the first column
"""

from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from .series import LabeledSeriesSet


class DatasetFormatError(ValueError):
    """Malformed dataset file (ragged rows, non-numeric cells, empty file)"""


def _canonical_label(raw: str) -> str:
    text = str(raw).strip()
    try:
        value = float(text)
    except ValueError:
        return text
    return str(int(value)) if value.is_integer() else text


def _label_order(labels: Iterable[str]) -> list:
    unique = sorted(set(labels))
    try:
        return sorted(unique, key=float)
    except ValueError:
        return unique


def load_ucr_tsv(path: Union[str, Path], label_mapping: Optional[Dict[str, int]] = None,
                 name: Optional[str] = None) -> LabeledSeriesSet:
    """
    Load a UCR-format TSV file

    Args:
        path: file to read
        label_mapping: mapping from original label text to class index; pass the
            training set's mapping when loading its test split
        name: dataset name (defaults to the file stem)

    Returns:
        LabeledSeriesSet with labels remapped to 0..k-1
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, sep="\t", header=None, dtype={0: str},
                            float_precision="round_trip", skip_blank_lines=True)
    except pd.errors.EmptyDataError as exc:
        raise DatasetFormatError(f"{path}: empty file") from exc
    except pd.errors.ParserError as exc:
        raise DatasetFormatError(f"{path}: ragged rows ({exc})") from exc

    if frame.empty or frame.shape[1] < 2:
        raise DatasetFormatError(f"{path}: expected a label column followed by values")

    raw_labels = frame.pop(0)
    if raw_labels.isna().any():
        raise DatasetFormatError(f"{path}: missing class label on line {int(raw_labels.isna().idxmax()) + 1}")

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad_cells = numeric.isna() & frame.notna()
    if bad_cells.any().any():
        row, col = np.argwhere(bad_cells.to_numpy())[0]
        raise DatasetFormatError(
            f"{path}: non-numeric cell '{frame.iat[row, col]}' on line {row + 1}, column {col + 2}"
        )
    if numeric.isna().any().any():
        row = int(np.argwhere(numeric.isna().to_numpy())[0][0])
        raise DatasetFormatError(f"{path}: ragged rows, line {row + 1} is shorter than line 1")

    labels_text = [_canonical_label(v) for v in raw_labels]
    if label_mapping is None:
        label_mapping = {label: i for i, label in enumerate(_label_order(labels_text))}
    unknown = sorted(set(labels_text) - set(label_mapping))
    if unknown:
        raise DatasetFormatError(f"{path}: labels {unknown} are not in the provided label mapping")

    dataset = LabeledSeriesSet(
        features=numeric.to_numpy(dtype=np.float64),
        labels=np.array([label_mapping[label] for label in labels_text], dtype=np.int64),
        name=name or path.stem,
        n_classes=max(len(label_mapping), 2),
        label_mapping=dict(label_mapping),
    )
    logger.debug(f"Loaded {path}: n={dataset.n}, L={dataset.length}, classes={dataset.n_classes}")
    return dataset


def save_ucr_tsv(dataset: LabeledSeriesSet, path: Union[str, Path]) -> Path:
    """Write a series set back in UCR format using its original label text"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    inverse = {index: label for label, index in dataset.label_mapping.items()}
    labels = [inverse.get(int(y), str(int(y))) for y in dataset.labels]
    frame = pd.DataFrame(dataset.features)
    frame.insert(0, "label", labels)
    frame.to_csv(path, sep="\t", header=False, index=False, float_format="%.17g")
    return path
