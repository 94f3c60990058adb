"""
Parameter files: JSON object {name: {"shape": [...], "values": [...]}}
Values are written with Python's shortest round-trip float repr, so save/load is bit-exact.
"""

import json
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, StrictFloat, StrictInt, TypeAdapter, ValidationError

from diffcore import ShapeMismatchError

from .classifier import TrainedClassifier
from .spec import ModelSpec


class ParameterFileError(ValueError):
    """Parameter file is unreadable, not JSON, or holds non-numeric payload"""


class ParameterEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shape: List[StrictInt]
    values: List[StrictFloat]


_FILE_ADAPTER = TypeAdapter(Dict[str, ParameterEntry])


def save_parameters(model: TrainedClassifier, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        name: {"shape": list(value.shape), "values": value.ravel().tolist()}
        for name, value in sorted(model.parameters.items())
    }
    path.write_text(json.dumps(payload), encoding="utf-8")
    logger.debug(f"Saved {model.n_parameters} parameters to {path}")
    return path


def load_parameters(spec: ModelSpec, path: Union[str, Path], seed: int = 0) -> TrainedClassifier:
    """
    Load parameters saved by save_parameters

    Raises:
        ParameterFileError: missing file, invalid JSON, non-numeric or inconsistent entries
        ShapeMismatchError: names or shapes do not match `spec`
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        entries = _FILE_ADAPTER.validate_python(raw)
    except OSError as exc:
        raise ParameterFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterFileError(f"{path} is not valid JSON: {exc}") from exc
    except ValidationError as exc:
        raise ParameterFileError(f"{path} has a malformed payload: {exc.errors()[0]['msg']}") from exc

    parameters = {}
    for name, entry in entries.items():
        values = np.array(entry.values, dtype=np.float64)
        if values.size != int(np.prod(entry.shape)) or any(d < 0 for d in entry.shape):
            raise ParameterFileError(f"{path}: '{name}' has {values.size} values for shape {entry.shape}")
        if not np.all(np.isfinite(values)):
            raise ParameterFileError(f"{path}: '{name}' holds non-finite values")
        parameters[name] = values.reshape(entry.shape)

    try:
        return TrainedClassifier(spec=spec, parameters=parameters, seed=seed)
    except ShapeMismatchError as exc:
        raise ShapeMismatchError(f"{path}: {exc}") from exc
