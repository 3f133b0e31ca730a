import pytest

from adjustment.weight import TaskWeight
from evaluation.harness import (
    check_ordering,
    evaluate_estimators,
    local_training_sets,
    split_training_targets,
)
from evaluation.metrics import ErrorSummary, summarize
from evaluation.operator import (
    EstimatorType,
    LotaruEstimator,
    fit_task_weights,
    get_available_estimators,
    get_estimator,
)
from evaluation.studies import (
    combination_cdfs,
    combination_study,
    factor_accuracy,
    median_factor_difference,
    natural_key,
)
from utils.errors import AdjustmentError, EvaluationError


def _mpe(summaries):
    return {s.key["estimator"]: s.mpe for s in summaries}


def test_available_estimators():
    assert get_available_estimators() == ["lotaru", "naive", "online-m", "online-p"]


def test_split_uses_local_partitions_for_training(synthetic_cluster):
    training, targets = split_training_targets(synthetic_cluster(), "local", "full")

    assert {r.node for r in training} == {"local"}
    assert all(r.partition_label != "full" for r in training)
    assert len(targets) == 3 * 3
    assert {r.node for r in targets} == {"local", "fast", "slow"}


def test_split_without_targets_is_an_error(synthetic_cluster):
    with pytest.raises(EvaluationError, match="'whole'"):
        split_training_targets(synthetic_cluster(), "local", "whole")


def test_split_without_local_training_is_an_error(synthetic_cluster):
    with pytest.raises(EvaluationError, match="'elsewhere'"):
        split_training_targets(synthetic_cluster(), "elsewhere", "full")


def test_estimators_rank_as_expected_on_synthetic_cluster(synthetic_cluster, cluster_profiles, frequencies):
    freq_old, freq_new = frequencies
    errors = evaluate_estimators(
        synthetic_cluster(), cluster_profiles, "local", freq_old=freq_old, freq_new=freq_new
    )

    summaries = summarize(errors, group_by=("estimator",))
    mpe = _mpe(summaries)

    assert mpe["lotaru"] < 0.02
    assert mpe["naive"] > 0.20
    assert mpe["online-m"] == mpe["online-p"]
    assert check_ordering(summaries).ordered


def test_lotaru_is_exact_on_every_node(synthetic_cluster, cluster_profiles, frequencies):
    freq_old, freq_new = frequencies
    errors = evaluate_estimators(
        synthetic_cluster(),
        cluster_profiles,
        "local",
        estimators=[EstimatorType.LOTARU],
        freq_old=freq_old,
        freq_new=freq_new,
    )

    assert len(errors) == 9
    assert max(e.err for e in errors) < 1e-4


def test_lotaru_without_frequencies_cannot_leave_the_local_node(synthetic_cluster, cluster_profiles):
    training_sets = local_training_sets(synthetic_cluster(), "local")

    estimator = get_estimator(EstimatorType.LOTARU, training_sets, profiles=cluster_profiles, local="local")

    assert estimator.predict("align", "local", 1e9) == pytest.approx(40_000.0, rel=1e-4)
    with pytest.raises(AdjustmentError, match="freq_old and freq_new"):
        estimator.predict("align", "fast", 1e9)


def test_weights_are_recovered_from_reduced_runs(synthetic_cluster, frequencies):
    weights = fit_task_weights(local_training_sets(synthetic_cluster(), "local"), *frequencies)

    assert {task: round(w.w, 9) for task, w in weights.items() if w} == {"align": 0.9, "index": 0.3, "sort": 0.6}


def test_factor_of_unknown_node_is_an_error(cluster_profiles):
    estimator = LotaruEstimator({}, {"t": TaskWeight(task="t", w=0.5)}, cluster_profiles, "local")

    with pytest.raises(AdjustmentError, match="'moon'"):
        estimator.factor("t", "moon")


def _summary(estimator: str, mpe: float) -> ErrorSummary:
    return ErrorSummary(
        key={"estimator": estimator}, mpe=mpe, mean=mpe, percentiles={}, min=mpe, max=mpe, std=0.0, count=1
    )


def test_check_ordering():
    summaries = [_summary("lotaru", 0.1), _summary("online-p", 0.3), _summary("online-m", 0.3), _summary("naive", 0.5)]

    assert check_ordering(summaries).ordered
    assert not check_ordering([_summary("lotaru", 0.3), _summary("naive", 0.3)]).ordered
    assert check_ordering([_summary("naive", 0.9)]).mpe == {"naive": 0.9}


def test_check_ordering_needs_estimator_groups():
    summary = ErrorSummary(key={"node": "n"}, mpe=0.1, mean=0.1, percentiles={}, min=0, max=0, std=0, count=1)

    with pytest.raises(EvaluationError, match="grouped by estimator"):
        check_ordering([summary])


def test_factor_accuracy_on_exact_cluster(synthetic_cluster, cluster_profiles, frequencies):
    records = synthetic_cluster()
    weights = fit_task_weights(local_training_sets(records, "local"), *frequencies)

    comparisons = factor_accuracy(records, cluster_profiles, "local", weights)

    assert len(comparisons) == 3 * 2
    assert {c.node for c in comparisons} == {"fast", "slow"}
    assert all(d < 1e-9 for d in median_factor_difference(comparisons).values())


def test_natural_key_orders_partition_labels():
    assert sorted(["p10", "p2", "p1"], key=natural_key) == ["p1", "p2", "p10"]


def test_combination_study(synthetic_cluster):
    results = combination_study(
        synthetic_cluster(), "local", estimators=[EstimatorType.LOTARU, EstimatorType.NAIVE]
    )

    assert len(results) == 26 * 2
    lotaru = [r for r in results if r.estimator == "lotaru"]
    assert max(r.mpe for r in lotaru) < 1e-3
    smallest = next(r for r in lotaru if r.labels == ("p4", "p5"))
    assert smallest.coverage == pytest.approx(0.09375)
    assert smallest.below_threshold
    assert not next(r for r in lotaru if r.labels == ("p1", "p2")).below_threshold

    cdfs = combination_cdfs(results)
    assert list(cdfs) == ["lotaru", "naive"]
    assert cdfs["lotaru"][-1][1] == 1.0


def test_combination_study_needs_enough_partitions(synthetic_cluster):
    with pytest.raises(EvaluationError, match="at least 6"):
        combination_study(synthetic_cluster(), "local", k_min=6)
