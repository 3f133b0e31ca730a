"""Secondary studies over a trace corpus.

`factor_accuracy` compares the node factor with the factor actually observed
between full-input runs. `combination_study` retrains every estimator on each
subset of the local partitions and records the local-node MPE against the
cumulative size of the subset.
"""

import re
from collections import defaultdict
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from adjustment.factor import node_factor
from adjustment.weight import TaskWeight
from bench.profile import NodeProfile
from evaluation.harness import score_targets, split_training_targets
from evaluation.metrics import error_cdf
from evaluation.operator import EstimatorType, get_estimator
from sampling.combinations import enumerate_combinations
from sampling.plan import coverage_fraction
from sampling.settings import sampling_settings
from traces.schema import RunRecord
from traces.training import build_training_sets, effective_input_size
from utils.errors import EvaluationError
from utils.log import logger


class FactorComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: str
    node: str
    actual: float
    calculated: float

    @property
    def difference(self) -> float:
        return abs(self.actual - self.calculated)


def factor_accuracy(
    records: Sequence[RunRecord],
    profiles: Mapping[str, NodeProfile],
    local: str,
    weights: Mapping[str, Optional[TaskWeight]],
    eval_label: Optional[str] = None,
    truncate: Optional[bool] = None,
) -> List[FactorComparison]:
    """Observed runtime ratio target/local on the full input against the node factor, per task and node."""
    _, targets = split_training_targets(records, local, eval_label)
    runtimes: Dict[Tuple[str, str], List[float]] = defaultdict(list)
    for target in targets:
        runtimes[(target.task, target.node)].append(target.runtime)
    medians = {key: float(np.median(values)) for key, values in runtimes.items()}

    if local not in profiles:
        raise EvaluationError(f"local node {local!r} has no profile")

    comparisons = []
    for (task, node), runtime in sorted(medians.items()):
        weight = weights.get(task)
        if node == local or (task, local) not in medians or weight is None or node not in profiles:
            continue
        comparisons.append(
            FactorComparison(
                task=task,
                node=node,
                actual=runtime / medians[(task, local)],
                calculated=node_factor(weight.w, profiles[local], profiles[node], truncate),
            )
        )
    return comparisons


def median_factor_difference(comparisons: Sequence[FactorComparison]) -> Dict[str, float]:
    """Median |actual - calculated| per target node."""
    by_node: Dict[str, List[float]] = defaultdict(list)
    for comparison in comparisons:
        by_node[comparison.node].append(comparison.difference)
    return {node: float(np.median(values)) for node, values in sorted(by_node.items())}


class CombinationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    estimator: str
    labels: Tuple[str, ...]
    coverage: float
    below_threshold: bool
    mpe: float
    count: int

    @property
    def partitions(self) -> int:
        return len(self.labels)


def natural_key(label: str) -> Tuple[object, ...]:
    return tuple(int(part) if part.isdigit() else part for part in re.split(r"(\d+)", label))


def combination_study(
    records: Sequence[RunRecord],
    local: str,
    estimators: Sequence[EstimatorType] = tuple(EstimatorType),
    eval_label: Optional[str] = None,
    k_min: Optional[int] = None,
    use_abs: Optional[bool] = None,
    threads: Optional[int] = None,
) -> List[CombinationResult]:
    k_min = sampling_settings.k_min if k_min is None else k_min
    training, targets = split_training_targets(records, local, eval_label)
    local_targets = [target for target in targets if target.node == local]
    if not local_targets:
        raise EvaluationError(f"no full-input run on local node {local!r}")

    training_sets = build_training_sets(training)
    labels = sorted({label for ts in training_sets.values() for label in ts.normal_labels}, key=natural_key)
    if len(labels) < k_min:
        raise EvaluationError(f"{len(labels)} partition label(s) on {local!r}, the study needs at least {k_min}")

    target_sizes: Dict[str, List[float]] = defaultdict(list)
    for target in local_targets:
        target_sizes[target.task].append(effective_input_size(target).size)

    space = enumerate_combinations(len(labels), k_min)
    logger.info(f"Combination study: {len(space)} subset(s) of {len(labels)} partition(s)")

    results = []
    for subset in space:
        chosen = tuple(labels[i - 1] for i in subset)
        restricted = {task: ts.restrict(set(chosen)) for task, ts in training_sets.items()}
        restricted = {task: ts for task, ts in restricted.items() if ts.normal_runs}
        if not restricted:
            continue

        coverages = [
            coverage_fraction(restricted[task].xs, float(np.median(sizes))).fraction
            for task, sizes in target_sizes.items()
            if task in restricted and np.median(sizes) > 0
        ]
        coverage = float(np.median(coverages)) if coverages else 0.0

        for estimator_id in estimators:
            estimator = get_estimator(estimator_id, restricted, local=local, use_abs=use_abs, threads=threads)
            errors = score_targets(estimator, local_targets, warn_missing=False)
            if not errors:
                continue
            results.append(
                CombinationResult(
                    estimator=estimator.name,
                    labels=chosen,
                    coverage=coverage,
                    below_threshold=coverage < sampling_settings.coverage_threshold,
                    mpe=float(np.median([error.err for error in errors])),
                    count=len(errors),
                )
            )
    return results


def combination_cdfs(results: Sequence[CombinationResult]) -> Dict[str, List[Tuple[float, float]]]:
    """Per-estimator CDF over the MPE of every partition combination."""
    by_estimator: Dict[str, List[float]] = defaultdict(list)
    for result in results:
        by_estimator[result.estimator].append(result.mpe)
    return {estimator: error_cdf(values) for estimator, values in sorted(by_estimator.items())}
