from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from estimator.bayes import BayesPosterior, BayesPrior, fit_bayes_lr
from estimator.pearson import PearsonResult, pearson
from estimator.settings import estimator_settings
from traces.schema import TrainingSet
from utils.errors import EstimatorError, SingularDesignError
from utils.log import logger


class ModelKind(str, Enum):
    REGRESSION = "regression"
    MEDIAN = "median"


class Prediction(BaseModel):
    """Point estimate in milliseconds with central credible intervals per level."""

    model_config = ConfigDict(frozen=True)

    mean: float
    intervals: Dict[float, Tuple[float, float]] = Field(default_factory=dict)
    kind: ModelKind

    def interval(self, level: float) -> Tuple[float, float]:
        try:
            return self.intervals[level]
        except KeyError:
            raise EstimatorError(f"no credible interval at level {level}")

    def scaled(self, factor: float) -> "Prediction":
        """Prediction multiplied by a positive node factor, bounds included."""
        if factor <= 0:
            raise EstimatorError(f"scale factor must be > 0, got {factor}")
        return Prediction(
            mean=self.mean * factor,
            intervals={level: (lo * factor, hi * factor) for level, (lo, hi) in self.intervals.items()},
            kind=self.kind,
        )


class TaskModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: str
    kind: ModelKind
    posterior: Optional[BayesPosterior] = None
    median: Optional[float] = Field(None, description="Lower median of the training runtimes (median kind).")
    runtimes: List[float] = Field(default_factory=list, description="Training runtimes, for the empirical band.")
    pearson: PearsonResult
    training_size: int = Field(..., ge=1)
    low_confidence: bool = False


# Fewest runs whose regression leaves a residual degree of freedom for the noise.
MIN_NOISE_RUNS = 3


def lower_median(values: Iterable[float]) -> float:
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _median_model(
    ts: TrainingSet, correlation: PearsonResult, low_confidence: bool = False
) -> TaskModel:
    return TaskModel(
        task=ts.task,
        kind=ModelKind.MEDIAN,
        median=lower_median(ts.ys),
        runtimes=sorted(ts.ys),
        pearson=correlation,
        training_size=len(ts.normal_runs),
        low_confidence=low_confidence,
    )


def fit_task_model(
    ts: TrainingSet,
    use_abs: Optional[bool] = None,
    prior: Optional[BayesPrior] = None,
) -> TaskModel:
    """Regression when size and runtime correlate significantly, the median runtime otherwise."""
    if not ts.normal_runs:
        raise EstimatorError(f"task {ts.task!r} has no normal-speed training runs")

    if len(ts.normal_runs) == 1:
        logger.warning(f"Task {ts.task}: one training run, using it as a low-confidence median")
        return _median_model(ts, PearsonResult(), low_confidence=True)

    correlation = pearson(ts.xs, ts.ys, use_abs=use_abs)
    if not correlation.significant:
        logger.debug(f"Task {ts.task}: p={correlation.p}, median model")
        return _median_model(ts, correlation)

    try:
        posterior = fit_bayes_lr(ts.xs, ts.ys, prior)
    except SingularDesignError as e:
        logger.warning(f"Task {ts.task}: {e}")
        return _median_model(ts, correlation)

    no_noise_df = len(ts.normal_runs) < MIN_NOISE_RUNS
    if no_noise_df:
        logger.warning(f"Task {ts.task}: two training runs leave the noise unidentified, low-confidence band")
    logger.debug(f"Task {ts.task}: p={correlation.p:.4f}, regression slope={posterior.slope:.6g}")
    return TaskModel(
        task=ts.task,
        kind=ModelKind.REGRESSION,
        posterior=posterior,
        runtimes=sorted(ts.ys),
        pearson=correlation,
        training_size=len(ts.normal_runs),
        low_confidence=no_noise_df,
    )


def _check_levels(levels: Iterable[float]) -> List[float]:
    checked = sorted(set(levels))
    for level in checked:
        if not 0.0 < level < 1.0:
            raise EstimatorError(f"credible level must lie in (0, 1), got {level}")
    return checked


def _runtime_band(
    center: float, runtimes: Iterable[float], levels: Iterable[float]
) -> Dict[float, Tuple[float, float]]:
    """Full training range widened to the point estimate, at every level."""
    values = [center, *runtimes]
    return {level: (min(values), max(values)) for level in levels}


def predict(model: TaskModel, x: float, levels: Optional[Iterable[float]] = None) -> Prediction:
    """Runtime prediction for input size x (bytes) on the machine the model was trained on."""
    if x < 0:
        raise EstimatorError(f"input size must be >= 0, got {x}")
    checked = _check_levels(estimator_settings.levels if levels is None else levels)

    if model.kind is ModelKind.REGRESSION and model.posterior is not None:
        location, scale, df = model.posterior.predictive(x)
        if model.low_confidence:
            band = _runtime_band(location, model.runtimes, checked)
            return Prediction(mean=location, intervals=band, kind=ModelKind.REGRESSION)
        intervals = {}
        for level in checked:
            half_width = float(stats.t.ppf(0.5 + level / 2.0, df)) * scale
            intervals[level] = (location - half_width, location + half_width)
        return Prediction(mean=location, intervals=intervals, kind=ModelKind.REGRESSION)

    if model.median is None:
        raise EstimatorError(f"task {model.task!r}: median model without a median")
    runtimes = np.asarray(model.runtimes or [model.median], dtype=float)
    intervals = {}
    for level in checked:
        lower = float(np.quantile(runtimes, 0.5 - level / 2.0))
        upper = float(np.quantile(runtimes, 0.5 + level / 2.0))
        # The lower median can sit outside a narrow interpolated band.
        intervals[level] = (min(lower, model.median), max(upper, model.median))
    return Prediction(mean=model.median, intervals=intervals, kind=ModelKind.MEDIAN)


def fit_task_models(
    training_sets: Mapping[str, TrainingSet],
    use_abs: Optional[bool] = None,
    prior: Optional[BayesPrior] = None,
    threads: Optional[int] = None,
) -> Dict[str, TaskModel]:
    """Fit every task with at least one normal-speed run; tasks are independent and fit in parallel."""
    tasks = sorted(task for task, ts in training_sets.items() if ts.normal_runs)
    skipped = len(training_sets) - len(tasks)
    if skipped:
        logger.warning(f"Skipping {skipped} task(s) without normal-speed training runs")

    with ThreadPoolExecutor(max_workers=threads) as executor:
        fitted = executor.map(lambda task: fit_task_model(training_sets[task], use_abs, prior), tasks)
        return dict(zip(tasks, fitted))
