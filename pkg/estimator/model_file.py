"""Versioned `key = value` model files, one per task.

Floats are written with `repr` so a model read back is bit-identical to the
one that was written. Keys the estimator does not own (the task's CPU weight)
travel as extras.
"""

import re
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from estimator.bayes import BayesPosterior
from estimator.model import ModelKind, TaskModel
from estimator.pearson import PearsonResult
from utils.errors import EstimatorError
from utils.kvfile import format_kv, read_kv
from utils.log import logger

FORMAT_VERSION = 1
MODEL_SUFFIX = ".model"
OWN_KEYS = {
    "format_version",
    "task",
    "kind",
    "training_size",
    "low_confidence",
    "pearson_p",
    "pearson_significant",
    "median",
    "runtimes",
    "mean_standardized",
    "precision_matrix",
    "noise_shape",
    "noise_rate",
    "x_mean",
    "x_scale",
    "y_mean",
}


def model_filename(task: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", task) + MODEL_SUFFIX


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _floats(values: List[float]) -> str:
    return ";".join(repr(float(v)) for v in values)


def _parse_floats(raw: str) -> List[float]:
    return [float(v) for v in raw.split(";") if v.strip()]


def model_to_fields(model: TaskModel) -> Dict[str, object]:
    fields: Dict[str, object] = {
        "format_version": FORMAT_VERSION,
        "task": _quote(model.task),
        "kind": model.kind.value,
        "training_size": model.training_size,
        "low_confidence": str(model.low_confidence).lower(),
        "pearson_p": "none" if model.pearson.p is None else repr(model.pearson.p),
        "pearson_significant": str(model.pearson.significant).lower(),
        "median": None if model.median is None else repr(model.median),
        "runtimes": _floats(model.runtimes),
    }
    posterior = model.posterior
    if posterior is not None:
        fields.update(
            {
                "mean_standardized": _floats(list(posterior.mean_standardized)),
                "precision_matrix": _floats([v for row in posterior.precision_matrix for v in row]),
                "noise_shape": repr(posterior.noise_shape),
                "noise_rate": repr(posterior.noise_rate),
                "x_mean": repr(posterior.x_mean),
                "x_scale": repr(posterior.x_scale),
                "y_mean": repr(posterior.y_mean),
            }
        )
    return fields


def model_from_fields(values: Mapping[str, str], source: str = "model file") -> Tuple[TaskModel, Dict[str, str]]:
    """Rebuild a TaskModel; returns it with the keys it does not own."""
    version = values.get("format_version")
    if version != str(FORMAT_VERSION):
        raise EstimatorError(f"{source}: unsupported format_version {version!r}")

    try:
        posterior = None
        if values.get("kind") == ModelKind.REGRESSION.value:
            mean = _parse_floats(values["mean_standardized"])
            matrix = _parse_floats(values["precision_matrix"])
            posterior = BayesPosterior(
                mean_standardized=(mean[0], mean[1]),
                precision_matrix=((matrix[0], matrix[1]), (matrix[2], matrix[3])),
                noise_shape=float(values["noise_shape"]),
                noise_rate=float(values["noise_rate"]),
                x_mean=float(values["x_mean"]),
                x_scale=float(values["x_scale"]),
                y_mean=float(values["y_mean"]),
            )
        raw_p = values.get("pearson_p", "none")
        model = TaskModel(
            task=values["task"],
            kind=ModelKind(values["kind"]),
            posterior=posterior,
            median=float(values["median"]) if values.get("median") else None,
            runtimes=_parse_floats(values.get("runtimes", "")),
            pearson=PearsonResult(
                p=None if raw_p == "none" else float(raw_p),
                significant=values.get("pearson_significant") == "true",
            ),
            training_size=int(values["training_size"]),
            low_confidence=values.get("low_confidence") == "true",
        )
    except (KeyError, IndexError) as e:
        raise EstimatorError(f"{source}: missing model field {e}")
    except ValueError as e:
        raise EstimatorError(f"{source}: invalid model field: {e}")

    extras = {key: value for key, value in values.items() if key not in OWN_KEYS}
    return model, extras


def write_model_file(
    model: TaskModel,
    directory: Union[str, Path],
    extras: Optional[Mapping[str, object]] = None,
) -> Path:
    fields = model_to_fields(model)
    for key, value in (extras or {}).items():
        if key in OWN_KEYS:
            raise EstimatorError(f"extra model field {key!r} clashes with a model field")
        fields[key] = value
    path = Path(directory) / model_filename(model.task)
    try:
        path.write_text(format_kv(fields, header=f"lotaru task model for {model.task}"), encoding="utf-8")
    except OSError as e:
        raise EstimatorError(f"cannot write {path}: {e.strerror or e}")
    return path


def read_model_file(path: Union[str, Path]) -> Tuple[TaskModel, Dict[str, str]]:
    path = Path(path)
    return model_from_fields(read_kv(path, EstimatorError), source=path.name)


def write_model_dir(
    models: Mapping[str, TaskModel],
    directory: Union[str, Path],
    extras: Optional[Mapping[str, Mapping[str, object]]] = None,
) -> List[Path]:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise EstimatorError(f"cannot create model directory {directory}: {e.strerror or e}")
    names: Dict[str, str] = {}
    paths = []
    for task in sorted(models):
        name = model_filename(task)
        if name in names:
            raise EstimatorError(f"tasks {names[name]!r} and {task!r} map to the same model file {name}")
        names[name] = task
        paths.append(write_model_file(models[task], directory, (extras or {}).get(task)))
    logger.info(f"Wrote {len(paths)} model file(s) to {directory}")
    return paths


def read_model_dir(directory: Union[str, Path]) -> Dict[str, Tuple[TaskModel, Dict[str, str]]]:
    directory = Path(directory)
    if not directory.is_dir():
        raise EstimatorError(f"model directory not found: {directory}")
    loaded: Dict[str, Tuple[TaskModel, Dict[str, str]]] = {}
    for path in sorted(directory.glob(f"*{MODEL_SUFFIX}")):
        model, extras = read_model_file(path)
        loaded[model.task] = (model, extras)
    if not loaded:
        raise EstimatorError(f"no model files in {directory}")
    return loaded
