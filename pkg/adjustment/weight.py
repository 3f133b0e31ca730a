from typing import Dict, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from adjustment.settings import adjustment_settings
from traces.schema import TrainingSet
from utils.errors import AdjustmentError
from utils.log import logger

WEIGHT_PREFIX = "weight_"


def runtime_deviation(time_new: float, time_old: float) -> float:
    """Signed relative deviation of the reduced-frequency runtime from the normal one."""
    if time_old <= 0:
        raise AdjustmentError(f"time_old must be > 0, got {time_old}")
    return (time_new - time_old) / time_old


def cpu_weight(median_dev: float, freq_old: float, freq_new: float) -> float:
    """Share of the runtime that scales with CPU speed, clamped to [0, 1]."""
    if freq_new <= 0:
        raise AdjustmentError(f"freq_new must be > 0, got {freq_new}")
    if freq_old == freq_new:
        raise AdjustmentError("freq_old equals freq_new, the reduced-frequency run was not reduced")
    if freq_old < freq_new:
        raise AdjustmentError(f"freq_old ({freq_old}) must exceed freq_new ({freq_new})")
    return max(0.0, min(1.0, median_dev / (freq_old / freq_new - 1.0)))


class TaskWeight(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: str
    median_dev: Optional[float] = Field(None, description="Median runtime deviation over the pairs.")
    w: float = Field(..., ge=0.0, le=1.0)
    pair_count: int = Field(0, ge=0)
    no_reduced_run: bool = False

    def to_fields(self) -> Dict[str, object]:
        return {
            f"{WEIGHT_PREFIX}median_dev": "none" if self.median_dev is None else repr(self.median_dev),
            f"{WEIGHT_PREFIX}w": repr(self.w),
            f"{WEIGHT_PREFIX}pair_count": self.pair_count,
            f"{WEIGHT_PREFIX}no_reduced_run": str(self.no_reduced_run).lower(),
        }

    @classmethod
    def from_fields(cls, task: str, fields: Mapping[str, str]) -> "TaskWeight":
        try:
            raw_dev = fields.get(f"{WEIGHT_PREFIX}median_dev", "none")
            return cls(
                task=task,
                median_dev=None if raw_dev == "none" else float(raw_dev),
                w=float(fields[f"{WEIGHT_PREFIX}w"]),
                pair_count=int(fields.get(f"{WEIGHT_PREFIX}pair_count", "0")),
                no_reduced_run=fields.get(f"{WEIGHT_PREFIX}no_reduced_run") == "true",
            )
        except KeyError as e:
            raise AdjustmentError(f"task {task!r}: missing weight field {e}")
        except ValueError as e:
            raise AdjustmentError(f"task {task!r}: invalid weight field: {e}")


def task_weight(ts: TrainingSet, freq_old: float, freq_new: float) -> TaskWeight:
    if not ts.pairs:
        logger.warning(
            f"Task {ts.task}: no reduced-frequency run, using w = {adjustment_settings.default_weight}"
        )
        return TaskWeight(task=ts.task, w=adjustment_settings.default_weight, no_reduced_run=True)

    deviations = [runtime_deviation(time_new, time_old) for _, time_old, time_new in ts.pairs]
    median_dev = float(np.median(deviations))
    w = cpu_weight(median_dev, freq_old, freq_new)
    logger.debug(f"Task {ts.task}: median deviation {median_dev:.4f} over {len(deviations)} pair(s), w = {w:.4f}")
    return TaskWeight(task=ts.task, median_dev=median_dev, w=w, pair_count=len(deviations))
