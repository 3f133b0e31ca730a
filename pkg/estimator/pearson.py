from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from estimator.settings import estimator_settings
from utils.errors import EstimatorError


class PearsonResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: Optional[float] = Field(None, ge=-1.0, le=1.0, description="Sample correlation, None when undefined.")
    significant: bool = False

    @classmethod
    def from_value(
        cls,
        p: Optional[float],
        threshold: Optional[float] = None,
        use_abs: Optional[bool] = None,
    ) -> "PearsonResult":
        threshold = estimator_settings.pearson_threshold if threshold is None else threshold
        use_abs = estimator_settings.pearson_abs if use_abs is None else use_abs
        if p is None:
            return cls(p=None, significant=False)
        gated = abs(p) if use_abs else p
        return cls(p=p, significant=gated > threshold)


def pearson(
    xs: Sequence[float],
    ys: Sequence[float],
    threshold: Optional[float] = None,
    use_abs: Optional[bool] = None,
) -> PearsonResult:
    """Sample Pearson coefficient between input sizes and runtimes."""
    if len(xs) != len(ys):
        raise EstimatorError(f"pearson needs equally long inputs, got {len(xs)} and {len(ys)}")
    if len(xs) < 2:
        raise EstimatorError(f"pearson needs at least 2 points, got {len(xs)}")

    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return PearsonResult.from_value(None, threshold, use_abs)

    p = float(dx @ dy) / float(np.sqrt(sxx * syy))
    return PearsonResult.from_value(min(1.0, max(-1.0, p)), threshold, use_abs)
