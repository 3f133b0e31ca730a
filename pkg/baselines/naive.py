from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from utils.errors import BaselineError


class NaiveModel(BaseModel):
    """Mean runtime-per-byte ratio of one task."""

    model_config = ConfigDict(frozen=True)

    task: str = ""
    mean_ratio: float = Field(..., ge=0, description="Mean of runtime / input size, ms per byte.")


def naive_fit(tuples: Sequence[Tuple[float, float]], task: str = "") -> NaiveModel:
    if not tuples:
        raise BaselineError(f"task {task!r}: naive model needs at least one (size, runtime) tuple")
    sizes = np.array([size for size, _ in tuples], dtype=float)
    runtimes = np.array([runtime for _, runtime in tuples], dtype=float)
    if np.any(sizes <= 0):
        raise BaselineError(f"task {task!r}: naive model needs input sizes > 0")
    return NaiveModel(task=task, mean_ratio=float(np.mean(runtimes / sizes)))


def naive_predict(model: NaiveModel, size: float) -> float:
    if size < 0:
        raise BaselineError(f"input size must be >= 0, got {size}")
    return model.mean_ratio * size
