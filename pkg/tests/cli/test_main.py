from pathlib import Path

import pytest

from bench.profile import NodeProfile, format_profile
from cli.main import run
from cli.settings import load_config
from traces.parser import serialize_traces
from utils.errors import ConfigError


def _rows(csv_text: str):
    header, *lines = csv_text.strip().splitlines()
    names = header.split(",")
    return {row["node"]: row for row in (dict(zip(names, line.split(","))) for line in lines)}


def _three_node_args(three_node_dir: Path, *extra: str):
    return [
        "predict",
        "--profiles",
        str(three_node_dir / "profiles"),
        "--traces",
        str(three_node_dir / "traces.csv"),
        "--query",
        "fastqc=500000",
        *extra,
    ]


@pytest.fixture
def cluster_files(tmp_path, synthetic_cluster, cluster_profiles, frequencies):
    traces = tmp_path / "traces.csv"
    freq_old, freq_new = frequencies
    traces.write_text(serialize_traces(synthetic_cluster(), metadata={"freq_old": freq_old, "freq_new": freq_new}))
    profiles = tmp_path / "profiles"
    profiles.mkdir()
    for node, profile in cluster_profiles.items():
        (profiles / f"{node}.profile").write_text(format_profile(profile))
    return traces, profiles


def test_three_node_end_to_end_in_truncation_mode(three_node_dir, capsys):
    assert run(_three_node_args(three_node_dir, "--truncate")) == 0

    rows = _rows(capsys.readouterr().out)
    assert rows["local"]["mean_ms"] == "100000.00"
    assert rows["N1"]["mean_ms"] == "133000.00"
    assert rows["N2"]["mean_ms"] == "96000.00"
    assert rows["N1"]["w"] == "0.8"
    assert rows["N1"]["model_kind"] == "median"


def test_three_node_end_to_end_in_full_precision(three_node_dir, capsys):
    assert run(_three_node_args(three_node_dir)) == 0

    rows = _rows(capsys.readouterr().out)
    assert rows["N1"]["mean_ms"] == "133333.33"
    assert rows["N2"]["mean_ms"] == "96923.08"


def test_train_then_predict_from_models(three_node_dir, tmp_path, capsys):
    models = tmp_path / "models"

    assert run(["train", "--traces", str(three_node_dir / "traces.csv"), "--out", str(models)]) == 0
    assert [p.name for p in models.iterdir()] == ["fastqc.model"]
    assert "weight_w = 0.8" in (models / "fastqc.model").read_text()

    args = ["predict", "--profiles", str(three_node_dir / "profiles"), "--models", str(models), "--local", "local"]
    assert run([*args, "--query", "fastqc=500000", "--truncate"]) == 0
    assert _rows(capsys.readouterr().out)["N1"]["mean_ms"] == "133000.00"


def test_train_writes_one_model_per_task(cluster_files, tmp_path):
    traces, _ = cluster_files
    models = tmp_path / "models"

    args = ["train", "--traces", str(traces), "--out", str(models), "--local", "local", "--eval-label", "full"]
    assert run(args) == 0

    assert sorted(p.name for p in models.iterdir()) == ["align.model", "index.model", "sort.model"]


def test_predict_without_profiles_is_a_usage_error(three_node_dir):
    assert run(["predict", "--traces", str(three_node_dir / "traces.csv"), "--query", "fastqc=1"]) == 2


def test_predict_needs_exactly_one_source(three_node_dir, tmp_path):
    args = ["predict", "--profiles", str(three_node_dir / "profiles"), "--query", "fastqc=1"]

    assert run(args) == 2
    assert run([*args, "--traces", str(three_node_dir / "traces.csv"), "--models", str(tmp_path)]) == 2


def test_unknown_flag_is_a_usage_error():
    assert run(["plan-samples", "--size", "1024", "--colour"]) == 2


def test_unknown_query_task_is_reported(three_node_dir, capsys):
    assert run([*_three_node_args(three_node_dir), "--query", "bwa=1000"]) == 1

    assert "[adjustment] unknown task 'bwa'" in capsys.readouterr().err


def test_baseline_estimator_from_traces(three_node_dir, capsys):
    assert run(_three_node_args(three_node_dir, "--estimator", "naive")) == 0

    rows = _rows(capsys.readouterr().out)
    assert rows["N1"]["model_kind"] == "naive"
    assert rows["N1"]["mean_ms"] == rows["N2"]["mean_ms"]


def test_config_file_overrides_environment_and_flags_override_both(three_node_dir, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LOTARU_TRUNCATE", "false")
    config = tmp_path / "lotaru.conf"
    config.write_text("# hand-worked three node example\ntruncate = true\n")

    assert run(_three_node_args(three_node_dir, "--config", str(config))) == 0
    assert _rows(capsys.readouterr().out)["N1"]["mean_ms"] == "133000.00"

    assert run(_three_node_args(three_node_dir, "--config", str(config), "--no-truncate")) == 0
    assert _rows(capsys.readouterr().out)["N1"]["mean_ms"] == "133333.33"


def test_environment_applies_without_config(three_node_dir, monkeypatch, capsys):
    monkeypatch.setenv("LOTARU_TRUNCATE", "true")

    assert run(_three_node_args(three_node_dir)) == 0
    assert _rows(capsys.readouterr().out)["N2"]["mean_ms"] == "96000.00"


def test_load_config_rejects_inverted_frequencies():
    with pytest.raises(ConfigError, match="must exceed"):
        load_config(freq_old=800.0, freq_new=1000.0)


def test_load_config_parses_levels():
    assert load_config(levels="0.95;0.5").levels == (0.5, 0.95)


def test_invalid_config_value_exits_with_two(three_node_dir, tmp_path):
    config = tmp_path / "bad.conf"
    config.write_text("levels = 1.5\n")

    assert run(_three_node_args(three_node_dir, "--config", str(config))) == 2


def test_evaluate_writes_report_and_ordering(cluster_files, tmp_path, capsys):
    traces, profiles = cluster_files
    out = tmp_path / "report"

    args = ["evaluate", "--traces", str(traces), "--profiles", str(profiles), "--out", str(out), "--local", "local"]
    assert run(args) == 0

    assert sorted(p.name for p in out.iterdir()) == [
        "cdf.csv",
        "cdf.svg",
        "errors.csv",
        "factor_accuracy.csv",
        "summary.csv",
        "summary.svg",
    ]
    stdout = capsys.readouterr().out.splitlines()
    assert stdout[0].startswith("lotaru\t")
    assert stdout[-1] == "ordered\ttrue"


def test_evaluate_with_combination_study(cluster_files, tmp_path):
    traces, profiles = cluster_files
    out = tmp_path / "report"
    args = ["evaluate", "--traces", str(traces), "--profiles", str(profiles), "--out", str(out), "--local", "local"]

    assert run([*args, "--estimator", "lotaru", "--format", "csv", "--combinations"]) == 0

    lines = (out / "combinations.csv").read_text().splitlines()
    assert lines[0] == "estimator,labels,partitions,coverage,below_threshold,mpe,count"
    assert len(lines) == 1 + 26
    assert (out / "combinations_cdf.csv").exists()


def test_evaluate_is_deterministic(cluster_files, tmp_path):
    traces, profiles = cluster_files
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        args = ["evaluate", "--traces", str(traces), "--profiles", str(profiles), "--out", str(out)]
        assert run([*args, "--local", "local", "--threads", "2"]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})

    assert outputs[0] == outputs[1]


def test_plan_samples(capsys):
    assert run(["plan-samples", "--size", "1,024", "-n", "3"]) == 0

    assert capsys.readouterr().out == "label,size,fraction\np1,512,0.5\np2,256,0.25\np3,128,0.125\n"


def test_split_fastq(tmp_path, capsys):
    fastq = tmp_path / "reads.fastq"
    fastq.write_text("".join(f"@r{i}\nACGT\n+\nIIII\n" for i in range(16)))
    out = tmp_path / "parts"

    assert run(["split", "--input", str(fastq), "--out", str(out), "-n", "4"]) == 0

    sizes = [len(p.read_text().splitlines()) // 4 for p in sorted(out.iterdir())]
    assert sizes == [8, 4, 2, 1]
    assert capsys.readouterr().out.startswith("label,size,fraction\np1,8,0.5\n")


def test_split_of_malformed_fastq_fails(tmp_path, capsys):
    fastq = tmp_path / "reads.fastq"
    fastq.write_text("@r1\nACGT\n+\nIIII\n@r2\nACGT\n+\n")

    assert run(["split", "--input", str(fastq), "--out", str(tmp_path / "parts"), "-n", "1"]) == 1
    assert "record 2" in capsys.readouterr().err


def test_bench_writes_profile(tmp_path, mocker):
    profile = NodeProfile(node="desk", cpu_events_per_sec=450, flops=3.9e6, read_iops=410, write_iops=405)
    run_all = mocker.patch("cli.main.run_all", return_value=profile)
    out = tmp_path / "desk.profile"

    assert run(["bench", "--node", "desk", "--cpu-limit-secs", "0.5", "--out", str(out)]) == 0

    assert run_all.call_args.args == ("desk",)
    assert run_all.call_args.kwargs["cpu_limit_secs"] == 0.5
    text = out.read_text()
    assert text.startswith("# measured ")
    assert "cpu_events_per_sec = 450.0" in text


def test_training_twice_writes_identical_model_files(cluster_files, tmp_path):
    traces, _ = cluster_files
    outputs = []
    for name in ("first", "second"):
        models = tmp_path / name
        args = ["train", "--traces", str(traces), "--out", str(models), "--local", "local", "--eval-label", "full"]
        assert run(args) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(models.iterdir())})

    assert outputs[0] == outputs[1]


def _remapped_traces(three_node_dir: Path, tmp_path: Path) -> Path:
    text = (three_node_dir / "traces.csv").read_text()
    traces = tmp_path / "renamed.csv"
    traces.write_text(text.replace("Workflow,Task,Machine,", "Workflow,Process,Host,", 1))
    return traces


def test_column_flags_read_a_renamed_header(three_node_dir, tmp_path):
    traces = _remapped_traces(three_node_dir, tmp_path)
    models = tmp_path / "models"

    args = ["train", "--traces", str(traces), "--out", str(models), "--column", "task=Process", "--column", "node=Host"]
    assert run(args) == 0

    assert [p.name for p in models.iterdir()] == ["fastqc.model"]


def test_config_file_renames_trace_columns(three_node_dir, tmp_path, capsys):
    traces = _remapped_traces(three_node_dir, tmp_path)
    conf = tmp_path / "lotaru.conf"
    conf.write_text("column_task = Process\ncolumn_node = Host\nlocal = local\n")

    args = ["predict", "--profiles", str(three_node_dir / "profiles"), "--traces", str(traces)]
    assert run([*args, "--query", "fastqc=500000", "--truncate", "--config", str(conf)]) == 0

    assert _rows(capsys.readouterr().out)["N1"]["mean_ms"] == "133000.00"


def test_renamed_header_without_mapping_is_a_usage_error(three_node_dir, tmp_path, capsys):
    traces = _remapped_traces(three_node_dir, tmp_path)

    assert run(["train", "--traces", str(traces), "--out", str(tmp_path / "models")]) == 2
    assert "Task" in capsys.readouterr().err


def test_unknown_column_field_is_a_usage_error(three_node_dir, tmp_path, capsys):
    args = ["train", "--traces", str(three_node_dir / "traces.csv"), "--out", str(tmp_path / "models")]

    assert run([*args, "--column", "machine=Host"]) == 2
    assert "--column" in capsys.readouterr().err


def test_non_utf8_trace_file_is_reported(tmp_path, capsys):
    traces = tmp_path / "traces.csv"
    traces.write_bytes(b"Workflow,Task\n\xffeager,fastqc\n")

    assert run(["train", "--traces", str(traces), "--out", str(tmp_path / "models")]) == 1

    err = capsys.readouterr().err
    assert "[trace-data]" in err
    assert "not UTF-8" in err


def test_unwritable_model_directory_is_reported(three_node_dir, tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")

    args = ["train", "--traces", str(three_node_dir / "traces.csv"), "--out", str(blocker / "models")]
    assert run(args) == 1
    assert "[estimator] cannot create model directory" in capsys.readouterr().err


def test_split_of_non_utf8_input_fails(tmp_path, capsys):
    fastq = tmp_path / "reads.fastq"
    fastq.write_bytes(b"@r1\nAC\xfeGT\n+\nIIII\n")

    assert run(["split", "--input", str(fastq), "--out", str(tmp_path / "parts"), "-n", "1"]) == 1
    assert "not UTF-8" in capsys.readouterr().err
    assert not (tmp_path / "parts").exists()


def test_plan_samples_reads_partitions_from_config(tmp_path, capsys):
    conf = tmp_path / "lotaru.conf"
    conf.write_text("partitions = 2\n")

    assert run(["plan-samples", "--size", "1024", "--config", str(conf)]) == 0
    assert capsys.readouterr().out == "label,size,fraction\np1,512,0.5\np2,256,0.25\n"

    assert run(["plan-samples", "--size", "1024", "--config", str(conf), "-n", "1"]) == 0
    assert capsys.readouterr().out == "label,size,fraction\np1,512,0.5\n"


def test_bench_reads_node_from_config(tmp_path, mocker):
    profile = NodeProfile(node="rack7", cpu_events_per_sec=450, flops=3.9e6, read_iops=410, write_iops=405)
    run_all = mocker.patch("cli.main.run_all", return_value=profile)
    conf = tmp_path / "lotaru.conf"
    conf.write_text(f"node = rack7\nio_path = {tmp_path}\n")

    assert run(["bench", "--config", str(conf), "--out", str(tmp_path / "rack7.profile")]) == 0

    assert run_all.call_args.args == ("rack7",)
    assert run_all.call_args.kwargs["io_path"] == tmp_path
