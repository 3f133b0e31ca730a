import numpy as np
import pytest

from adjustment.factor import node_factor, truncate_two_decimals
from adjustment.matrix import build_estimate_matrix, point_estimate_matrix
from adjustment.weight import TaskWeight, cpu_weight, runtime_deviation, task_weight
from bench.profile import NodeProfile
from estimator.model import ModelKind, Prediction, fit_task_model, predict
from traces.schema import TrainingSet
from utils.errors import AdjustmentError


def _profile(node: str, cpu: float, io: float) -> NodeProfile:
    return NodeProfile(node=node, cpu_events_per_sec=cpu, read_iops=io, write_iops=io)


def _flat_model(task: str = "fastqc", runtime: float = 100_000.0):
    ts = TrainingSet(
        task=task,
        normal_runs=[(500_000.0 / 2**k, runtime) for k in range(5)],
        normal_labels=[f"p{k}" for k in range(1, 6)],
    )
    return fit_task_model(ts)


@pytest.mark.parametrize("new, old, expected", [(125, 100, 0.25), (100, 100, 0.0), (90, 100, -0.10)])
def test_runtime_deviation(new, old, expected):
    assert runtime_deviation(new, old) == pytest.approx(expected)


def test_runtime_deviation_rejects_non_positive_old_runtime():
    with pytest.raises(AdjustmentError, match="time_old"):
        runtime_deviation(1.0, 0.0)


@pytest.mark.parametrize("median_dev, expected", [(0.25, 1.0), (-0.05, 0.0), (0.10, 0.4), (0.6, 1.0)])
def test_cpu_weight(median_dev, expected):
    assert cpu_weight(median_dev, 1000, 800) == pytest.approx(expected)


@pytest.mark.parametrize("freq_old, freq_new", [(1000, 1000), (800, 1000), (1000, 0)])
def test_cpu_weight_rejects_bad_frequencies(freq_old, freq_new):
    with pytest.raises(AdjustmentError):
        cpu_weight(0.1, freq_old, freq_new)


def _paired_set(new_runtimes) -> TrainingSet:
    labels = [f"p{k}" for k in range(1, len(new_runtimes) + 1)]
    return TrainingSet(
        task="t",
        normal_runs=[(1000.0 * k, 100.0) for k in range(1, len(labels) + 1)],
        normal_labels=labels,
        pairs=[(label, 100.0, new) for label, new in zip(labels, new_runtimes)],
    )


def test_task_weight_of_cpu_bound_pairs():
    weight = task_weight(_paired_set([125.0, 125.0, 125.0]), 1000, 800)

    assert weight.w == pytest.approx(1.0)
    assert weight.pair_count == 3


def test_task_weight_takes_median_deviation():
    weight = task_weight(_paired_set([100.0, 125.0, 110.0]), 1000, 800)

    assert weight.median_dev == pytest.approx(0.10)
    assert weight.w == pytest.approx(0.4)


def test_task_weight_without_pairs_falls_back():
    weight = task_weight(TrainingSet(task="t", normal_runs=[(1.0, 1.0)]), 1000, 800)

    assert weight.w == 0.5
    assert weight.no_reduced_run
    assert weight.median_dev is None


def test_task_weight_fields_are_lossless():
    weight = TaskWeight(task="t", median_dev=0.123456789, w=0.49382715, pair_count=4)

    fields = {key: str(value) for key, value in weight.to_fields().items()}

    assert TaskWeight.from_fields("t", fields) == weight


def test_task_weight_without_w_field_is_an_error():
    with pytest.raises(AdjustmentError, match="weight_w"):
        TaskWeight.from_fields("t", {})


def test_three_node_factors(three_node_profiles):
    local = three_node_profiles["local"]

    assert node_factor(0.8, local, three_node_profiles["N1"]) == pytest.approx(4 / 3)
    assert node_factor(0.8, local, three_node_profiles["N2"]) == pytest.approx(0.8 * 500 / 520 + 0.2)
    assert node_factor(0.8, local, three_node_profiles["N1"], truncate=True) == 1.33
    assert node_factor(0.8, local, three_node_profiles["N2"], truncate=True) == 0.96


def test_local_factor_is_exactly_one(three_node_profiles):
    local = three_node_profiles["local"]

    for w in (0.0, 0.37, 1.0):
        assert node_factor(w, local, local) == 1.0


def test_factor_rejects_weight_outside_unit_interval(three_node_profiles):
    with pytest.raises(AdjustmentError, match="CPU weight"):
        node_factor(1.5, three_node_profiles["local"], three_node_profiles["N1"])


def test_truncate_two_decimals():
    assert truncate_two_decimals(0.969230769) == 0.96
    assert truncate_two_decimals(1.3333333) == 1.33
    assert truncate_two_decimals(1.0) == 1.0


def test_factor_properties_on_random_profiles():
    rng = np.random.default_rng(1000)
    for _ in range(1000):
        local = _profile("local", rng.uniform(50, 1000), rng.uniform(50, 1000))
        target = _profile("target", rng.uniform(50, 1000), rng.uniform(50, 1000))
        w = float(rng.uniform(0, 1))
        scale = float(rng.uniform(0.1, 10))

        factor = node_factor(w, local, target)
        only_cpu = node_factor(1.0, local, target)
        only_io = node_factor(0.0, local, target)

        assert factor > 0
        assert node_factor(w, local, local) == 1.0
        assert factor == pytest.approx(w * only_cpu + (1 - w) * only_io, rel=1e-12)
        assert only_cpu == pytest.approx(local.cpu_score / target.cpu_score, rel=1e-12)
        assert only_io == pytest.approx(local.io_score / target.io_score, rel=1e-12)
        scaled_local = _profile("local", local.cpu_score * scale, local.io_score * scale)
        scaled_target = _profile("target", target.cpu_score * scale, target.io_score * scale)
        assert node_factor(w, scaled_local, scaled_target) == pytest.approx(factor, rel=1e-12)

        mean = float(rng.uniform(1, 1e6))
        prediction = Prediction(mean=mean, intervals={0.5: (0.9 * mean, 1.1 * mean)}, kind=ModelKind.MEDIAN)
        lo, hi = prediction.scaled(factor).interval(0.5)
        assert lo <= prediction.scaled(factor).mean <= hi

        assert 0.0 <= cpu_weight(float(rng.normal(0, 1)), 1000 + float(rng.uniform(1, 2000)), 1000) <= 1.0


def _three_node_matrix(three_node_profiles, truncate: bool):
    model = _flat_model()
    weights = {"fastqc": TaskWeight(task="fastqc", median_dev=0.2, w=0.8, pair_count=3)}
    return build_estimate_matrix(
        {"fastqc": model}, weights, three_node_profiles, "local", [("fastqc", 500_000.0)], truncate=truncate
    )


def test_three_node_matrix_in_truncation_mode(three_node_profiles):
    frame = _three_node_matrix(three_node_profiles, truncate=True).to_frame().set_index("node")

    assert frame.loc["local", "mean_ms"] == "100000.00"
    assert frame.loc["N1", "mean_ms"] == "133000.00"
    assert frame.loc["N2", "mean_ms"] == "96000.00"
    assert frame.loc["N1", "factor"] == "1.33"


def test_three_node_matrix_in_full_precision(three_node_profiles):
    matrix = _three_node_matrix(three_node_profiles, truncate=False)

    assert matrix.get("fastqc", "N1", 500_000.0).prediction.mean == pytest.approx(133_333.333333)
    assert matrix.get("fastqc", "N2", 500_000.0).prediction.mean == pytest.approx(96_923.0769)
    assert matrix.get("fastqc", "local", 500_000.0).factor == 1.0


def test_matrix_csv_columns(three_node_profiles):
    header = _three_node_matrix(three_node_profiles, truncate=True).to_csv().splitlines()[0]

    assert header == "task,node,input_size,mean_ms,lo50,hi50,lo95,hi95,factor,w,model_kind"


def test_matrix_on_local_node_only_equals_raw_predictions():
    model = fit_task_model(
        TrainingSet(task="t", normal_runs=[(1e6, 10.0), (2e6, 19.0), (4e6, 41.0), (8e6, 79.0)])
    )
    profiles = {"local": _profile("local", 500, 500)}
    weights = {"t": TaskWeight(task="t", w=0.3)}

    matrix = build_estimate_matrix({"t": model}, weights, profiles, "local", [("t", 3e6), ("t", 1e7)])

    for cell in matrix.cells:
        assert cell.prediction == predict(model, cell.input_size, [0.5, 0.95])


def test_targets_with_identical_profiles_get_identical_rows(three_node_profiles):
    profiles = dict(three_node_profiles, N3=three_node_profiles["N1"].model_copy(update={"node": "N3"}))
    weights = {"fastqc": TaskWeight(task="fastqc", w=0.8)}

    matrix = build_estimate_matrix({"fastqc": _flat_model()}, weights, profiles, "local", [("fastqc", 1e6)])

    n1 = matrix.get("fastqc", "N1", 1e6)
    n3 = matrix.get("fastqc", "N3", 1e6)
    assert (n1.prediction, n1.factor) == (n3.prediction, n3.factor)


def test_unknown_task_is_named(three_node_profiles):
    weights = {"fastqc": TaskWeight(task="fastqc", w=0.8)}

    with pytest.raises(AdjustmentError, match="'bwa'"):
        build_estimate_matrix({"fastqc": _flat_model()}, weights, three_node_profiles, "local", [("bwa", 1e6)])


def test_unknown_local_node_is_named(three_node_profiles):
    weights = {"fastqc": TaskWeight(task="fastqc", w=0.8)}

    with pytest.raises(AdjustmentError, match="'desk'"):
        build_estimate_matrix({"fastqc": _flat_model()}, weights, three_node_profiles, "desk", [("fastqc", 1e6)])


def test_point_estimate_matrix_applies_no_factor():
    matrix = point_estimate_matrix(
        "naive", lambda task, node, x: x / 1000, ["b", "a"], "a", [("t", 5000.0)], levels=[0.5]
    )

    assert [c.node for c in matrix.cells] == ["a", "b"]
    assert all(c.factor == 1.0 and c.prediction.mean == 5.0 for c in matrix.cells)
    assert matrix.to_frame().loc[0, "lo50"] == ""
