from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from evaluation.settings import evaluation_settings
from utils.errors import EvaluationError

GROUP_KEYS = ("workflow", "task", "node", "estimator")


def task_error(predicted: float, actual: float) -> float:
    """Relative prediction error |predicted - actual| / actual."""
    if actual <= 0:
        raise EvaluationError(f"actual runtime must be > 0, got {actual}")
    return abs(predicted - actual) / actual


class ErrorRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    workflow: str
    task: str
    node: str
    estimator: str
    predicted: float = Field(..., description="Predicted runtime in ms.")
    actual: float = Field(..., gt=0, description="Observed runtime in ms.")

    @property
    def err(self) -> float:
        return task_error(self.predicted, self.actual)


class ErrorSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    key: Dict[str, str] = Field(default_factory=dict)
    mpe: float = Field(..., description="Median prediction error.")
    mean: float
    percentiles: Dict[int, float]
    min: float
    max: float
    std: float
    count: int


def errors_frame(records: Iterable[ErrorRecord]) -> pd.DataFrame:
    rows = [{**record.model_dump(), "err": record.err} for record in records]
    return pd.DataFrame(rows, columns=[*GROUP_KEYS, "predicted", "actual", "err"])


def summarize(
    records: Sequence[ErrorRecord],
    group_by: Sequence[str] = (),
    percentiles: Optional[Sequence[int]] = None,
) -> List[ErrorSummary]:
    """One summary per group, sorted by group key; MPE is the median error."""
    percentiles = evaluation_settings.percentiles if percentiles is None else percentiles
    if not records:
        raise EvaluationError("no error records to summarize")
    unknown = [key for key in group_by if key not in GROUP_KEYS]
    if unknown:
        raise EvaluationError(f"unknown group key(s) {unknown}, expected a subset of {list(GROUP_KEYS)}")

    frame = errors_frame(records)
    groups = frame.groupby(list(group_by), sort=True) if group_by else [((), frame)]

    summaries = []
    for key, group in groups:
        values = group["err"].to_numpy(dtype=float)
        key_values = key if isinstance(key, tuple) else (key,)
        summaries.append(
            ErrorSummary(
                key=dict(zip(group_by, (str(v) for v in key_values))),
                mpe=float(np.median(values)),
                mean=float(values.mean()),
                percentiles={p: float(np.percentile(values, p)) for p in percentiles},
                min=float(values.min()),
                max=float(values.max()),
                std=float(values.std()),
                count=int(values.size),
            )
        )
    return summaries


def summaries_frame(summaries: Sequence[ErrorSummary]) -> pd.DataFrame:
    rows = []
    for summary in summaries:
        row: Dict[str, object] = dict(summary.key)
        row.update({"mpe": summary.mpe, "mean": summary.mean})
        row.update({f"p{p}": value for p, value in summary.percentiles.items()})
        row.update({"min": summary.min, "max": summary.max, "std": summary.std, "count": summary.count})
        rows.append(row)
    return pd.DataFrame(rows)


def error_cdf(values: Iterable[Union[ErrorRecord, float]]) -> List[Tuple[float, float]]:
    """Empirical CDF as (err, fraction of errors <= err) step points."""
    errs = np.array([v.err if isinstance(v, ErrorRecord) else float(v) for v in values], dtype=float)
    if errs.size == 0:
        raise EvaluationError("error CDF needs at least one value")
    points, counts = np.unique(errs, return_counts=True)
    fractions = np.cumsum(counts) / errs.size
    return [(float(e), float(f)) for e, f in zip(points, fractions)]
