"""Online-M and Online-P, reduced to what local training data supports.

Both look for a correlation between input size and runtime. Correlated tasks
scale the runtime-per-byte ratio of the training point nearest the queried
size. Uncorrelated tasks return the mean runtime (M), or the mean of whichever
of a Normal and a Gamma distribution fits the runtimes better by
Kolmogorov-Smirnov distance (P).
"""

from enum import Enum
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from estimator.pearson import PearsonResult, pearson
from utils.errors import BaselineError


class OnlineVariant(str, Enum):
    M = "M"
    P = "P"


class OnlineModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: str = ""
    variant: OnlineVariant
    tuples: List[Tuple[float, float]] = Field(..., min_length=1, description="(bytes, ms) training tuples.")
    pearson: PearsonResult

    @property
    def correlated(self) -> bool:
        return self.pearson.significant


class FittedDistribution(NamedTuple):
    name: str
    mean: float
    ks_distance: float


def online_fit(tuples: Sequence[Tuple[float, float]], variant: OnlineVariant, task: str = "") -> OnlineModel:
    if not tuples:
        raise BaselineError(f"task {task!r}: online model needs at least one tuple")
    if any(size <= 0 for size, _ in tuples):
        raise BaselineError(f"task {task!r}: online model needs input sizes > 0")

    # A single tuple has no correlation and takes the uncorrelated branch.
    correlation = PearsonResult() if len(tuples) < 2 else pearson([x for x, _ in tuples], [y for _, y in tuples])
    return OnlineModel(
        task=task,
        variant=variant,
        tuples=[(float(x), float(y)) for x, y in tuples],
        pearson=correlation,
    )


def nearest_tuple(tuples: Sequence[Tuple[float, float]], size: float) -> Tuple[float, float]:
    """Tuple whose input size is closest to `size`, ties going to the smaller size."""
    return min(tuples, key=lambda t: (abs(t[0] - size), t[0]))


def fit_runtime_distribution(runtimes: Sequence[float]) -> FittedDistribution:
    """Method-of-moments Normal and Gamma fits, keeping the one closer by KS distance."""
    values = np.asarray(runtimes, dtype=float)
    mean = float(values.mean())
    variance = float(values.var())
    if variance == 0.0 or mean <= 0.0:
        return FittedDistribution("normal", mean, 0.0)

    normal = stats.norm(loc=mean, scale=np.sqrt(variance))
    gamma = stats.gamma(a=mean * mean / variance, scale=variance / mean)
    normal_ks = float(stats.kstest(values, normal.cdf).statistic)
    gamma_ks = float(stats.kstest(values, gamma.cdf).statistic)
    if gamma_ks < normal_ks:
        return FittedDistribution("gamma", float(gamma.mean()), gamma_ks)
    return FittedDistribution("normal", float(normal.mean()), normal_ks)


def online_predict(model: OnlineModel, size: float) -> float:
    if size < 0:
        raise BaselineError(f"input size must be >= 0, got {size}")

    if model.correlated:
        near_size, near_runtime = nearest_tuple(model.tuples, size)
        return near_runtime / near_size * size

    runtimes = [runtime for _, runtime in model.tuples]
    if model.variant is OnlineVariant.M:
        return float(np.mean(runtimes))
    return fit_runtime_distribution(runtimes).mean
