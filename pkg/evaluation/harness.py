"""Compare estimators against observed full-input runs.

Training data is every local-node record from a downsampled partition. The
targets are the normal-speed runs on the full input (partition label
`eval_label`) on every node, so the local node covers the homogeneous case
and the other nodes the heterogeneous one.
"""

from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from bench.profile import NodeProfile
from evaluation.metrics import ErrorRecord, ErrorSummary
from evaluation.operator import Estimator, EstimatorType, get_estimator
from evaluation.settings import evaluation_settings
from traces.schema import FreqMode, RunRecord, TrainingSet
from traces.training import build_training_sets, effective_input_size
from utils.errors import EvaluationError
from utils.log import logger

ORDERING = (EstimatorType.LOTARU, EstimatorType.ONLINE_P, EstimatorType.ONLINE_M, EstimatorType.NAIVE)


def split_training_targets(
    records: Sequence[RunRecord], local: str, eval_label: Optional[str] = None
) -> Tuple[List[RunRecord], List[RunRecord]]:
    """Returns (local training records, full-input target records)."""
    eval_label = evaluation_settings.eval_label if eval_label is None else eval_label
    training = [r for r in records if r.node == local and r.partition_label != eval_label]
    targets = [r for r in records if r.freq_mode is FreqMode.NORMAL and r.partition_label == eval_label]
    if not training:
        raise EvaluationError(f"no training records on local node {local!r}")
    if not targets:
        raise EvaluationError(f"no target records with partition label {eval_label!r}")
    targets.sort(key=lambda r: (r.workflow, r.task, r.node))
    return training, targets


def score_targets(
    estimator: Estimator, targets: Sequence[RunRecord], warn_missing: bool = True
) -> List[ErrorRecord]:
    errors = []
    missing = set()
    for target in targets:
        if not estimator.has_task(target.task):
            missing.add(target.task)
            continue
        x = effective_input_size(target).size
        errors.append(
            ErrorRecord(
                workflow=target.workflow,
                task=target.task,
                node=target.node,
                estimator=estimator.name,
                predicted=estimator.predict(target.task, target.node, x),
                actual=target.runtime,
            )
        )
    if missing and warn_missing:
        logger.warning(f"{estimator.name}: no training data for {len(missing)} task(s): {', '.join(sorted(missing))}")
    return errors


def evaluate_estimators(
    records: Sequence[RunRecord],
    profiles: Mapping[str, NodeProfile],
    local: str,
    estimators: Sequence[EstimatorType] = tuple(EstimatorType),
    eval_label: Optional[str] = None,
    freq_old: Optional[float] = None,
    freq_new: Optional[float] = None,
    use_abs: Optional[bool] = None,
    truncate: Optional[bool] = None,
    threads: Optional[int] = None,
) -> List[ErrorRecord]:
    training, targets = split_training_targets(records, local, eval_label)
    training_sets = build_training_sets(training)

    errors: List[ErrorRecord] = []
    for estimator_id in estimators:
        estimator = get_estimator(
            estimator_id,
            training_sets,
            profiles=profiles,
            local=local,
            freq_old=freq_old,
            freq_new=freq_new,
            use_abs=use_abs,
            truncate=truncate,
            threads=threads,
        )
        scored = score_targets(estimator, targets)
        logger.info(f"{estimator.name}: scored {len(scored)} target run(s)")
        errors.extend(scored)
    if not errors:
        raise EvaluationError("no target run could be predicted")
    return errors


def local_training_sets(
    records: Sequence[RunRecord], local: str, eval_label: Optional[str] = None
) -> Dict[str, TrainingSet]:
    training, _ = split_training_targets(records, local, eval_label)
    return build_training_sets(training)


class OrderingCheck(NamedTuple):
    mpe: Dict[str, float]
    ordered: bool


def check_ordering(summaries: Sequence[ErrorSummary]) -> OrderingCheck:
    """Whether MPE follows lotaru < online-p <= online-m < naive over the estimators present."""
    mpe: Dict[str, float] = {}
    for summary in summaries:
        estimator = summary.key.get("estimator")
        if estimator is None:
            raise EvaluationError("ordering check needs summaries grouped by estimator")
        mpe[estimator] = summary.mpe

    present = [e.value for e in ORDERING if e.value in mpe]
    ordered = True
    for better, worse in zip(present, present[1:]):
        if (better, worse) == (EstimatorType.ONLINE_P.value, EstimatorType.ONLINE_M.value):
            ordered &= mpe[better] <= mpe[worse]
        else:
            ordered &= mpe[better] < mpe[worse]
    return OrderingCheck(mpe=mpe, ordered=ordered)
