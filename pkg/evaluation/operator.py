from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, TypeVar

from adjustment.factor import node_factor
from adjustment.weight import TaskWeight, task_weight
from baselines.naive import NaiveModel, naive_fit, naive_predict
from baselines.online import OnlineModel, OnlineVariant, online_fit, online_predict
from bench.profile import NodeProfile
from estimator.model import TaskModel, fit_task_models, predict
from traces.schema import TrainingSet
from utils.errors import AdjustmentError, EvaluationError, LotaruError
from utils.log import logger

M = TypeVar("M")


class EstimatorType(str, Enum):
    LOTARU = "lotaru"
    NAIVE = "naive"
    ONLINE_M = "online-m"
    ONLINE_P = "online-p"


def get_available_estimators() -> List[str]:
    """Returns a list of all available estimator IDs."""
    return [estimator.value for estimator in EstimatorType]


class Estimator:
    """Point runtime predictions in ms for (task, node, input size)."""

    name: str = ""

    def has_task(self, task: str) -> bool:
        raise NotImplementedError

    def predict(self, task: str, node: str, x: float) -> float:
        raise NotImplementedError


class LotaruEstimator(Estimator):
    name = EstimatorType.LOTARU.value

    def __init__(
        self,
        models: Mapping[str, TaskModel],
        weights: Mapping[str, Optional[TaskWeight]],
        profiles: Optional[Mapping[str, NodeProfile]] = None,
        local: Optional[str] = None,
        truncate: Optional[bool] = None,
    ):
        self.models = dict(models)
        self.weights = dict(weights)
        self.profiles = dict(profiles or {})
        self.local = local
        self.truncate = truncate

    def has_task(self, task: str) -> bool:
        return task in self.models

    def factor(self, task: str, node: str) -> float:
        if node == self.local:
            return 1.0
        if self.local not in self.profiles:
            raise AdjustmentError(f"local node {self.local!r} has no profile")
        if node not in self.profiles:
            raise AdjustmentError(f"unknown node {node!r}: no profile")
        weight = self.weights.get(task)
        if weight is None:
            raise AdjustmentError(
                f"task {task!r}: CPU weight unknown, set freq_old and freq_new for the reduced-frequency run"
            )
        return node_factor(weight.w, self.profiles[self.local], self.profiles[node], self.truncate)

    def predict(self, task: str, node: str, x: float) -> float:
        return predict(self.models[task], x).mean * self.factor(task, node)


class NaiveEstimator(Estimator):
    name = EstimatorType.NAIVE.value

    def __init__(self, models: Mapping[str, NaiveModel]):
        self.models = dict(models)

    def has_task(self, task: str) -> bool:
        return task in self.models

    def predict(self, task: str, node: str, x: float) -> float:
        return naive_predict(self.models[task], x)


class OnlineEstimator(Estimator):
    def __init__(self, models: Mapping[str, OnlineModel], variant: OnlineVariant):
        self.models = dict(models)
        self.variant = variant
        self.name = f"online-{variant.value.lower()}"

    def has_task(self, task: str) -> bool:
        return task in self.models

    def predict(self, task: str, node: str, x: float) -> float:
        return online_predict(self.models[task], x)


def fit_task_weights(
    training_sets: Mapping[str, TrainingSet],
    freq_old: Optional[float],
    freq_new: Optional[float],
) -> Dict[str, Optional[TaskWeight]]:
    """CPU weight per task; None when the task has pairs but the run frequencies are unknown."""
    weights: Dict[str, Optional[TaskWeight]] = {}
    for task in sorted(training_sets):
        ts = training_sets[task]
        if ts.pairs and (freq_old is None or freq_new is None):
            weights[task] = None
            continue
        weights[task] = task_weight(ts, freq_old or 0.0, freq_new or 0.0)
    return weights


def _fit_each(training_sets: Mapping[str, TrainingSet], fit: Callable[[TrainingSet], M]) -> Dict[str, M]:
    models: Dict[str, M] = {}
    for task in sorted(training_sets):
        ts = training_sets[task]
        if not ts.normal_runs:
            continue
        try:
            models[task] = fit(ts)
        except LotaruError as e:
            logger.warning(f"Task {task}: {e}")
    return models


def get_estimator(
    estimator_id: EstimatorType,
    training_sets: Mapping[str, TrainingSet],
    profiles: Optional[Mapping[str, NodeProfile]] = None,
    local: Optional[str] = None,
    freq_old: Optional[float] = None,
    freq_new: Optional[float] = None,
    use_abs: Optional[bool] = None,
    truncate: Optional[bool] = None,
    threads: Optional[int] = None,
) -> Estimator:
    if estimator_id == EstimatorType.LOTARU:
        return LotaruEstimator(
            models=fit_task_models(training_sets, use_abs=use_abs, threads=threads),
            weights=fit_task_weights(training_sets, freq_old, freq_new),
            profiles=profiles,
            local=local,
            truncate=truncate,
        )
    if estimator_id == EstimatorType.NAIVE:
        return NaiveEstimator(_fit_each(training_sets, lambda ts: naive_fit(ts.normal_runs, ts.task)))
    if estimator_id in (EstimatorType.ONLINE_M, EstimatorType.ONLINE_P):
        variant = OnlineVariant.M if estimator_id == EstimatorType.ONLINE_M else OnlineVariant.P
        return OnlineEstimator(
            _fit_each(training_sets, lambda ts: online_fit(ts.normal_runs, variant, ts.task)),
            variant,
        )
    raise EvaluationError(f"unknown estimator {estimator_id!r}, expected one of {get_available_estimators()}")
