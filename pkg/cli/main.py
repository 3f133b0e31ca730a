"""lotaru command line.

bench -> plan-samples / split -> train -> predict -> evaluate. Diagnostics go
to stderr through the logger, data goes to files or stdout.
"""

import io
import platform
import sys
from pathlib import Path
from typing import Annotated, Dict, List, Optional, Sequence, Tuple

import click
import pandas as pd
import typer

from adjustment.matrix import EstimateMatrix, Query, build_estimate_matrix, point_estimate_matrix
from adjustment.weight import TaskWeight
from bench.profile import NodeProfile, format_profile, load_profiles
from bench.runner import run_all
from cli.settings import MAPPED_COLUMNS, CliSettings, load_config
from estimator.model import TaskModel, fit_task_models
from estimator.model_file import read_model_dir, write_model_dir
from evaluation.harness import check_ordering, evaluate_estimators, local_training_sets
from evaluation.metrics import error_cdf, errors_frame, summarize
from evaluation.operator import EstimatorType, fit_task_weights, get_estimator
from evaluation.report import REPORT_FORMATS, emit_report, write_frame
from evaluation.studies import combination_cdfs, combination_study, factor_accuracy, median_factor_difference
from sampling.plan import plan_partitions
from sampling.settings import sampling_settings
from sampling.splitter import FastqReader, LineBlockReader, RecordReader, count_records, split_records
from traces.parser import TraceParseResult, parse_traces
from traces.schema import RunRecord, TrainingSet
from traces.training import build_training_sets
from utils.dttm import current_utc_str
from utils.errors import ConfigError, LotaruError, TraceError
from utils.kvfile import parse_number, read_text_file
from utils.log import logger, set_log_level

app = typer.Typer(
    name="lotaru",
    help="Task runtime prediction for heterogeneous clusters from local downsampled runs.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)

ConfigOption = Annotated[
    Optional[Path],
    typer.Option("--config", exists=True, dir_okay=False, help="Flat key = value config file."),
]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")]
TracesOption = Annotated[Path, typer.Option("--traces", exists=True, dir_okay=False, help="Trace CSV file.")]
ProfilesOption = Annotated[
    Path, typer.Option("--profiles", exists=True, file_okay=False, help="Directory of node profiles.")
]
LocalOption = Annotated[Optional[str], typer.Option("--local", help="Node that ran the local training runs.")]
FreqOldOption = Annotated[Optional[float], typer.Option("--freq-old", help="Normal-run CPU frequency (MHz).")]
FreqNewOption = Annotated[Optional[float], typer.Option("--freq-new", help="Reduced-run CPU frequency (MHz).")]
PearsonAbsOption = Annotated[Optional[bool], typer.Option("--pearson-abs/--pearson-signed", help="Gate on |p|.")]
EvalLabelOption = Annotated[
    Optional[str], typer.Option("--eval-label", help="Partition label of the full-input target runs.")
]
ThreadsOption = Annotated[Optional[int], typer.Option("--threads", help="Worker threads (LOTARU_THREADS).")]
ColumnOption = Annotated[
    Optional[List[str]], typer.Option("--column", help="field=Header trace column name, repeatable.")
]


def _write_output(text: str, out: Optional[Path]) -> None:
    if out is None:
        typer.echo(text, nl=False)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot write {out}: {e.strerror or e}")
    logger.info(f"Wrote {out}")


def _column_flags(columns: Optional[List[str]]) -> Dict[str, str]:
    flags = {}
    for raw in columns or []:
        field, separator, name = raw.partition("=")
        field = field.strip()
        if not separator or not name.strip() or field not in MAPPED_COLUMNS:
            raise ConfigError(f"--column expects field=Header, field one of {', '.join(MAPPED_COLUMNS)}; got {raw!r}")
        flags[f"column_{field}"] = name.strip()
    return flags


def _read_traces(path: Path, config: CliSettings) -> TraceParseResult:
    result = parse_traces(read_text_file(path, TraceError), config.column_mapping())
    for error in result.errors:
        logger.warning(f"{path.name} row {error.row}: {error.column or 'row'}: {error.message}")
    if not result.records:
        raise ConfigError(f"{path}: no valid trace records")
    return result


def _frequencies(config: CliSettings, traces: TraceParseResult) -> Tuple[Optional[float], Optional[float]]:
    freq_old = config.freq_old if config.freq_old is not None else traces.metadata_float("freq_old")
    freq_new = config.freq_new if config.freq_new is not None else traces.metadata_float("freq_new")
    if freq_old is not None and freq_new is not None and freq_old <= freq_new:
        raise ConfigError(f"freq_old ({freq_old}) must exceed freq_new ({freq_new})")
    return freq_old, freq_new


def _local_node(config: CliSettings, records: Sequence[RunRecord]) -> str:
    if config.local:
        return config.local
    nodes = sorted({record.node for record in records})
    if len(nodes) == 1:
        return nodes[0]
    raise ConfigError(f"traces cover nodes {nodes}, pick the local one with --local")


def _training_sets(config: CliSettings, records: Sequence[RunRecord], local: str) -> Dict[str, TrainingSet]:
    eval_label = config.eval_label
    training = [r for r in records if r.node == local and (eval_label is None or r.partition_label != eval_label)]
    if not training:
        raise ConfigError(f"no training records on local node {local!r}")
    return build_training_sets(training)


def _require_weights(weights: Dict[str, Optional[TaskWeight]]) -> Dict[str, TaskWeight]:
    unknown = sorted(task for task, weight in weights.items() if weight is None)
    if unknown:
        raise ConfigError(
            f"freq_old and freq_new are needed for the CPU weight of {', '.join(unknown)}; "
            "add them to the trace header, the config file or the flags"
        )
    return {task: weight for task, weight in weights.items() if weight is not None}


@app.command()
def bench(
    node: Annotated[Optional[str], typer.Option("--node", help="Node name, defaults to the host name.")] = None,
    cpu_limit_secs: Annotated[Optional[float], typer.Option("--cpu-limit-secs")] = None,
    max_prime: Annotated[Optional[int], typer.Option("--max-prime")] = None,
    flops_n: Annotated[Optional[int], typer.Option("--flops-n")] = None,
    mem_block: Annotated[Optional[int], typer.Option("--mem-block")] = None,
    mem_total: Annotated[Optional[int], typer.Option("--mem-total")] = None,
    io_file_size: Annotated[Optional[int], typer.Option("--io-file-size")] = None,
    io_block: Annotated[Optional[int], typer.Option("--io-block")] = None,
    io_path: Annotated[Optional[Path], typer.Option("--io-path", exists=True, file_okay=False)] = None,
    out: Annotated[Optional[Path], typer.Option("--out", help="Profile file, stdout when omitted.")] = None,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Run the single-threaded microbenchmarks and write the node profile."""
    set_log_level(verbose)
    settings = load_config(config, node=node, io_path=io_path)
    profile = run_all(
        settings.node or platform.node() or "local",
        cpu_limit_secs=cpu_limit_secs,
        max_prime=max_prime,
        flops_n=flops_n,
        mem_block=mem_block,
        mem_total=mem_total,
        io_file_size=io_file_size,
        io_block=io_block,
        io_path=settings.io_path,
    )
    _write_output(format_profile(profile, header=f"measured {current_utc_str()}"), out)


@app.command("plan-samples")
def plan_samples(
    size: Annotated[str, typer.Option("--size", help="Original input size (bytes or records).")],
    partitions: Annotated[Optional[int], typer.Option("--partitions", "-n")] = None,
    out: Annotated[Optional[Path], typer.Option("--out", help="Plan CSV, stdout when omitted.")] = None,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Print the halving ladder of partition sizes as CSV."""
    set_log_level(verbose)
    settings = load_config(config, partitions=partitions)
    try:
        original_size = int(parse_number(size))
    except ValueError:
        raise ConfigError(f"--size is not a number: {size!r}")
    plan = plan_partitions(original_size, settings.partitions or sampling_settings.partitions)
    _write_output(plan.to_csv(), out)


@app.command()
def split(
    input_path: Annotated[Path, typer.Option("--input", exists=True, dir_okay=False, help="Uncompressed input.")],
    out: Annotated[Path, typer.Option("--out", file_okay=False, help="Directory for the partition files.")],
    partitions: Annotated[Optional[int], typer.Option("--partitions", "-n")] = None,
    lines_per_record: Annotated[
        int, typer.Option("--lines-per-record", help="4 reads FASTQ, any other value plain line blocks.")
    ] = 4,
    prefix: Annotated[str, typer.Option("--prefix")] = "sample",
    config: ConfigOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Cut a record-oriented file into contiguous halving partitions."""
    set_log_level(verbose)
    settings = load_config(config, partitions=partitions)
    fastq = lines_per_record == 4
    reader: RecordReader = FastqReader() if fastq else LineBlockReader(lines_per_record)

    with input_path.open(encoding="utf-8") as stream:
        total = count_records(stream, reader)
    plan = plan_partitions(total, settings.partitions or sampling_settings.partitions)
    with input_path.open(encoding="utf-8") as stream:
        paths = split_records(stream, plan, out, reader, total, prefix, ".fastq" if fastq else input_path.suffix)
    logger.info(f"Split {total} record(s) of {input_path.name} into {len(paths)} partition(s)")
    typer.echo(plan.to_csv(), nl=False)


@app.command()
def train(
    traces: TracesOption,
    out: Annotated[Path, typer.Option("--out", file_okay=False, help="Model directory.")],
    local: LocalOption = None,
    freq_old: FreqOldOption = None,
    freq_new: FreqNewOption = None,
    pearson_abs: PearsonAbsOption = None,
    eval_label: EvalLabelOption = None,
    threads: ThreadsOption = None,
    column: ColumnOption = None,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Fit one model per task from the local runs and write the model directory."""
    set_log_level(verbose)
    settings = load_config(
        config,
        local=local,
        freq_old=freq_old,
        freq_new=freq_new,
        pearson_abs=pearson_abs,
        eval_label=eval_label,
        threads=threads,
        **_column_flags(column),
    )
    parsed = _read_traces(traces, settings)
    node = _local_node(settings, parsed.records)
    training_sets = _training_sets(settings, parsed.records, node)
    freq_old, freq_new = _frequencies(settings, parsed)

    models = fit_task_models(training_sets, use_abs=settings.pearson_abs, threads=settings.threads)
    weights = _require_weights(fit_task_weights(training_sets, freq_old, freq_new))
    write_model_dir(models, out, extras={task: weights[task].to_fields() for task in models})


def _parse_queries(query: Optional[List[str]], queries: Optional[Path]) -> List[Query]:
    parsed: List[Query] = []
    for raw in query or []:
        task, separator, size = raw.rpartition("=")
        if not separator or not task:
            raise ConfigError(f"--query expects task=bytes, got {raw!r}")
        try:
            parsed.append((task, parse_number(size)))
        except ValueError:
            raise ConfigError(f"--query {raw!r}: input size is not a number")
    if queries is not None:
        frame = pd.read_csv(queries, dtype=str, keep_default_na=False, skipinitialspace=True)
        if not {"task", "input_size"} <= set(frame.columns):
            raise ConfigError(f"{queries}: query CSV needs the columns task and input_size")
        for row in frame.itertuples(index=False):
            try:
                parsed.append((str(row.task).strip(), parse_number(str(row.input_size))))
            except ValueError:
                raise ConfigError(f"{queries}: input size of task {row.task!r} is not a number")
    if not parsed:
        raise ConfigError("nothing to predict, pass --query task=bytes or --queries")
    for task, size in parsed:
        if size < 0:
            raise ConfigError(f"query for {task!r}: input size must be >= 0")
    return parsed


def _lotaru_matrix(
    settings: CliSettings,
    models: Dict[str, TaskModel],
    weights: Dict[str, TaskWeight],
    profiles: Dict[str, NodeProfile],
    local: str,
    queries: List[Query],
) -> EstimateMatrix:
    return build_estimate_matrix(
        models,
        weights,
        profiles,
        local,
        queries,
        levels=settings.levels,
        truncate=settings.truncate,
        threads=settings.threads,
    )


@app.command()
def predict(
    profiles: ProfilesOption,
    traces: Annotated[
        Optional[Path], typer.Option("--traces", exists=True, dir_okay=False, help="Train on the fly.")
    ] = None,
    models: Annotated[
        Optional[Path], typer.Option("--models", exists=True, file_okay=False, help="Trained model directory.")
    ] = None,
    query: Annotated[Optional[List[str]], typer.Option("--query", help="task=bytes, repeatable.")] = None,
    queries: Annotated[
        Optional[Path], typer.Option("--queries", exists=True, dir_okay=False, help="CSV: task,input_size.")
    ] = None,
    local: LocalOption = None,
    estimator: Annotated[Optional[str], typer.Option("--estimator")] = None,
    levels: Annotated[Optional[str], typer.Option("--levels", help="Credible levels, e.g. 0.5,0.95.")] = None,
    truncate: Annotated[Optional[bool], typer.Option("--truncate/--no-truncate")] = None,
    freq_old: FreqOldOption = None,
    freq_new: FreqNewOption = None,
    pearson_abs: PearsonAbsOption = None,
    eval_label: EvalLabelOption = None,
    threads: ThreadsOption = None,
    column: ColumnOption = None,
    out: Annotated[Optional[Path], typer.Option("--out", help="Estimate CSV, stdout when omitted.")] = None,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Estimate runtimes for every query on every profiled node."""
    set_log_level(verbose)
    settings = load_config(
        config,
        local=local,
        estimator=estimator,
        levels=levels,
        truncate=truncate,
        freq_old=freq_old,
        freq_new=freq_new,
        pearson_abs=pearson_abs,
        eval_label=eval_label,
        threads=threads,
        **_column_flags(column),
    )
    if (traces is None) == (models is None):
        raise click.UsageError("pass exactly one of --traces and --models")
    node_profiles = load_profiles(profiles)
    parsed_queries = _parse_queries(query, queries)
    estimator_id = EstimatorType(settings.estimator)

    if models is not None:
        if estimator_id != EstimatorType.LOTARU:
            raise ConfigError(f"model directories hold lotaru models, train {estimator_id.value} with --traces")
        if not settings.local:
            raise ConfigError("--local is required with --models")
        loaded = read_model_dir(models)
        task_models = {task: model for task, (model, _) in loaded.items()}
        weights = {task: TaskWeight.from_fields(task, extras) for task, (_, extras) in loaded.items()}
        matrix = _lotaru_matrix(settings, task_models, weights, node_profiles, settings.local, parsed_queries)
        _write_output(matrix.to_csv(), out)
        return

    assert traces is not None
    parsed = _read_traces(traces, settings)
    node = _local_node(settings, parsed.records)
    training_sets = _training_sets(settings, parsed.records, node)
    if estimator_id == EstimatorType.LOTARU:
        freq_old, freq_new = _frequencies(settings, parsed)
        task_models = fit_task_models(training_sets, use_abs=settings.pearson_abs, threads=settings.threads)
        weights = _require_weights(fit_task_weights(training_sets, freq_old, freq_new))
        matrix = _lotaru_matrix(settings, task_models, weights, node_profiles, node, parsed_queries)
    else:
        baseline = get_estimator(estimator_id, training_sets)
        unknown = sorted({task for task, _ in parsed_queries if not baseline.has_task(task)})
        if unknown:
            raise ConfigError(f"unknown task(s) {', '.join(unknown)}: no training data")
        matrix = point_estimate_matrix(
            estimator_id.value, baseline.predict, node_profiles, node, parsed_queries, settings.levels
        )
    _write_output(matrix.to_csv(), out)


@app.command()
def evaluate(
    traces: TracesOption,
    profiles: ProfilesOption,
    out: Annotated[Path, typer.Option("--out", file_okay=False, help="Report directory.")],
    local: LocalOption = None,
    estimator: Annotated[
        Optional[List[str]], typer.Option("--estimator", help="Repeatable, defaults to all estimators.")
    ] = None,
    group_by: Annotated[str, typer.Option("--group-by", help="Comma-separated summary keys.")] = "node,estimator",
    report_format: Annotated[Optional[List[str]], typer.Option("--format", help="csv and/or svg.")] = None,
    eval_label: EvalLabelOption = None,
    combinations: Annotated[bool, typer.Option("--combinations", help="Run the partition combination study.")] = False,
    k_min: Annotated[Optional[int], typer.Option("--k-min")] = None,
    truncate: Annotated[Optional[bool], typer.Option("--truncate/--no-truncate")] = None,
    freq_old: FreqOldOption = None,
    freq_new: FreqNewOption = None,
    pearson_abs: PearsonAbsOption = None,
    threads: ThreadsOption = None,
    column: ColumnOption = None,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Score the estimators against the full-input runs and write the report."""
    set_log_level(verbose)
    settings = load_config(
        config,
        local=local,
        truncate=truncate,
        freq_old=freq_old,
        freq_new=freq_new,
        pearson_abs=pearson_abs,
        eval_label=eval_label,
        threads=threads,
        **_column_flags(column),
    )
    try:
        estimators = [EstimatorType(e) for e in estimator] if estimator else list(EstimatorType)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--estimator")
    formats = report_format or list(REPORT_FORMATS)
    keys = [key.strip() for key in group_by.split(",") if key.strip()]

    node_profiles = load_profiles(profiles)
    parsed = _read_traces(traces, settings)
    node = _local_node(settings, parsed.records)
    freq_old, freq_new = _frequencies(settings, parsed)

    records = evaluate_estimators(
        parsed.records,
        node_profiles,
        node,
        estimators,
        eval_label=settings.eval_label,
        freq_old=freq_old,
        freq_new=freq_new,
        use_abs=settings.pearson_abs,
        truncate=settings.truncate,
        threads=settings.threads,
    )
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create report directory {out}: {e.strerror or e}")
    write_frame(errors_frame(records), out / "errors.csv")

    by_estimator: Dict[str, List[float]] = {}
    for record in records:
        by_estimator.setdefault(record.estimator, []).append(record.err)
    cdfs = {name: error_cdf(errs) for name, errs in by_estimator.items()}
    emit_report(summarize(records, keys), cdfs, formats, out)

    weights = fit_task_weights(local_training_sets(parsed.records, node, settings.eval_label), freq_old, freq_new)
    comparisons = factor_accuracy(parsed.records, node_profiles, node, weights, settings.eval_label, settings.truncate)
    if comparisons:
        frame = pd.DataFrame(
            [{**c.model_dump(), "difference": c.difference} for c in comparisons],
            columns=["task", "node", "actual", "calculated", "difference"],
        )
        write_frame(frame, out / "factor_accuracy.csv")
        for target, difference in median_factor_difference(comparisons).items():
            logger.info(f"Median factor difference on {target}: {difference:.4f}")

    if combinations:
        results = combination_study(
            parsed.records,
            node,
            estimators,
            eval_label=settings.eval_label,
            k_min=k_min,
            use_abs=settings.pearson_abs,
            threads=settings.threads,
        )
        if not results:
            raise ConfigError("the combination study produced no result")
        frame = pd.DataFrame(
            [
                {
                    "estimator": r.estimator,
                    "labels": ";".join(r.labels),
                    "partitions": r.partitions,
                    "coverage": r.coverage,
                    "below_threshold": r.below_threshold,
                    "mpe": r.mpe,
                    "count": r.count,
                }
                for r in results
            ]
        )
        write_frame(frame, out / "combinations.csv")
        combination_records = [r for r in records if r.node == node]
        summaries = summarize(combination_records or records, ["estimator"])
        emit_report(summaries, combination_cdfs(results), formats, out, prefix="combinations_")

    ordering = check_ordering(summarize(records, ["estimator"]))
    buffer = io.StringIO()
    for name, mpe in ordering.mpe.items():
        buffer.write(f"{name}\t{mpe:.6g}\n")
    buffer.write(f"ordered\t{str(ordering.ordered).lower()}\n")
    typer.echo(buffer.getvalue(), nl=False)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        result = app(args=list(argv) if argv is not None else None, prog_name="lotaru", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except click.Abort:
        typer.echo("Aborted.", err=True)
        return 1
    except LotaruError as e:
        typer.echo(str(e), err=True)
        return e.exit_code
    except (OSError, UnicodeError) as e:
        typer.echo(f"[cli] {e}", err=True)
        return 1
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
