"""Trace ingestion.

Traces are delimiter-separated tables with a header row. Leading `# key = value`
lines carry run metadata (the normal and reduced CPU frequencies of the two
local runs). Rows that fail numeric validation are reported and skipped, the
rest of the file is still parsed.
"""

import io
from typing import Dict, List, Optional, TextIO, Tuple, Union

import pandas as pd
from pydantic import BaseModel, Field

from traces.schema import ColumnMapping, FreqMode, RunRecord
from utils.errors import SchemaError
from utils.kvfile import parse_kv
from utils.log import logger

# Stands in for the first field of a row with more fields than the header.
RAGGED_MARKER = "\x00ragged:"


class RowError(BaseModel):
    row: int = Field(..., description="1-based data row number (header excluded).")
    column: Optional[str] = None
    message: str


class TraceParseResult(BaseModel):
    records: List[RunRecord] = Field(default_factory=list)
    errors: List[RowError] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    metadata: Dict[str, str] = Field(default_factory=dict)

    def metadata_float(self, key: str) -> Optional[float]:
        raw = self.metadata.get(key)
        return float(raw) if raw not in (None, "") else None


def split_metadata(text: str) -> Tuple[Dict[str, str], str]:
    """Separate leading `#` metadata lines from the table body."""
    lines = text.splitlines(keepends=True)
    header_lines = []
    while lines and lines[0].lstrip().startswith("#"):
        header_lines.append(lines.pop(0).lstrip()[1:])
    return parse_kv("".join(header_lines)), "".join(lines)


def _numeric(series: pd.Series) -> Tuple[pd.Series, pd.Series, pd.Series]:
    """Returns (values, blank mask, invalid mask) for a string column."""
    stripped = series.str.strip()
    blank = stripped == ""
    values = pd.to_numeric(stripped.where(~blank), errors="coerce")
    invalid = values.isna() & ~blank
    return values, blank, invalid


def parse_traces(content: Union[str, TextIO], schema: Optional[ColumnMapping] = None) -> TraceParseResult:
    schema = schema or ColumnMapping()
    text = content if isinstance(content, str) else content.read()
    metadata, body = split_metadata(text)

    if not body.strip():
        raise SchemaError("trace content has no header row")

    try:
        header = pd.read_csv(io.StringIO(body), sep=schema.delimiter, dtype=str, nrows=0).columns
        ragged: List[int] = []

        def mark_ragged(fields: List[str]) -> List[str]:
            ragged.append(len(fields))
            return [f"{RAGGED_MARKER}{len(ragged) - 1}"] + [""] * (len(header) - 1)

        # An all-empty first row pins the column count, so a ragged first row cannot turn into an index.
        header_line, _, rows = body.lstrip().partition("\n")
        guarded = f"{header_line}\n{schema.delimiter * (len(header) - 1)}\n{rows}"
        frame = pd.read_csv(
            io.StringIO(guarded),
            sep=schema.delimiter,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            engine="python",
            on_bad_lines=mark_ragged,
        ).fillna("").iloc[1:].reset_index(drop=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"trace table is not readable: {e}")
    frame.columns = [str(column).strip() for column in frame.columns]

    missing = [column for column in schema.required_columns() if column not in frame.columns]
    if missing:
        raise SchemaError(f"missing required column(s): {', '.join(missing)}")

    runtime, runtime_blank, runtime_invalid = _numeric(frame[schema.runtime])
    compressed, compressed_blank, compressed_invalid = _numeric(frame[schema.input_size_compressed])
    uncompressed, uncompressed_blank, uncompressed_invalid = _numeric(frame[schema.input_size_uncompressed])
    optional_cpu = _numeric(frame[schema.cpu_percent])[0] if schema.cpu_percent in frame.columns else None
    optional_rss = _numeric(frame[schema.rss])[0] if schema.rss in frame.columns else None

    result = TraceParseResult(metadata=metadata)
    for position in range(len(frame)):
        row = position + 1
        first = str(frame.iat[position, 0])
        if first.startswith(RAGGED_MARKER):
            fields = ragged[int(first[len(RAGGED_MARKER) :])]
            result.errors.append(RowError(row=row, message=f"expected {len(header)} fields, found {fields}"))
            continue
        row_errors: List[RowError] = []

        if runtime_blank.iat[position] or runtime_invalid.iat[position]:
            row_errors.append(RowError(row=row, column=schema.runtime, message="runtime is not numeric"))
        elif runtime.iat[position] <= 0:
            row_errors.append(RowError(row=row, column=schema.runtime, message="runtime must be > 0"))
        for column, invalid in (
            (schema.input_size_compressed, compressed_invalid),
            (schema.input_size_uncompressed, uncompressed_invalid),
        ):
            if invalid.iat[position]:
                row_errors.append(RowError(row=row, column=column, message="input size is not numeric"))
        if compressed_blank.iat[position] and uncompressed_blank.iat[position]:
            row_errors.append(RowError(row=row, column=None, message="both input sizes are absent"))

        try:
            freq_mode = FreqMode.parse(frame[schema.freq_mode].iat[position])
        except ValueError as e:
            row_errors.append(RowError(row=row, column=schema.freq_mode, message=str(e)))

        for column in (schema.workflow, schema.task, schema.node, schema.partition_label):
            if not frame[column].iat[position].strip():
                row_errors.append(RowError(row=row, column=column, message="value is empty"))

        if row_errors:
            result.errors.extend(row_errors)
            continue

        def size_at(values: pd.Series, blank: pd.Series) -> Optional[int]:
            if blank.iat[position]:
                return None
            return int(round(float(values.iat[position]) * schema.size_factor))

        cpu_percent = None
        if optional_cpu is not None and not pd.isna(optional_cpu.iat[position]):
            cpu_percent = float(optional_cpu.iat[position])
        rss = None
        if optional_rss is not None and not pd.isna(optional_rss.iat[position]):
            rss = int(optional_rss.iat[position])

        try:
            record = RunRecord(
                workflow=frame[schema.workflow].iat[position].strip(),
                task=frame[schema.task].iat[position].strip(),
                node=frame[schema.node].iat[position].strip(),
                input_size_compressed=size_at(compressed, compressed_blank),
                input_size_uncompressed=size_at(uncompressed, uncompressed_blank),
                runtime=float(runtime.iat[position]) * schema.runtime_factor,
                freq_mode=freq_mode,
                partition_label=frame[schema.partition_label].iat[position].strip(),
                cpu_percent=cpu_percent,
                rss=rss,
            )
        except ValueError as e:
            result.errors.append(RowError(row=row, column=None, message=str(e)))
            continue

        if record.size_inverted:
            warning = f"row {row}: uncompressed size is smaller than compressed size"
            logger.warning(warning)
            result.warnings.append(warning)
        result.records.append(record)

    if result.errors:
        logger.warning(f"Rejected {len({e.row for e in result.errors})} trace row(s)")
    logger.debug(f"Parsed {len(result.records)} trace record(s)")
    return result


def serialize_traces(
    records: List[RunRecord],
    schema: Optional[ColumnMapping] = None,
    metadata: Optional[Dict[str, object]] = None,
) -> str:
    """Write records in the schema's columns and units; the inverse of `parse_traces`."""
    schema = schema or ColumnMapping()

    def scaled_size(value: Optional[int]) -> object:
        if value is None:
            return ""
        if schema.size_factor == 1:
            return value
        return value / schema.size_factor

    rows = []
    for record in records:
        row: Dict[str, object] = {
            schema.workflow: record.workflow,
            schema.task: record.task,
            schema.node: record.node,
            schema.runtime: record.runtime / schema.runtime_factor,
            schema.input_size_compressed: scaled_size(record.input_size_compressed),
            schema.input_size_uncompressed: scaled_size(record.input_size_uncompressed),
            schema.freq_mode: record.freq_mode.value,
            schema.partition_label: record.partition_label,
        }
        if schema.cpu_percent:
            row[schema.cpu_percent] = "" if record.cpu_percent is None else record.cpu_percent
        if schema.rss:
            row[schema.rss] = "" if record.rss is None else record.rss
        rows.append(row)

    columns = schema.required_columns() + [c for c in (schema.cpu_percent, schema.rss) if c]
    frame = pd.DataFrame(rows, columns=columns, dtype=object)
    header = "".join(f"# {key} = {value}\n" for key, value in (metadata or {}).items())
    return header + frame.to_csv(index=False, sep=schema.delimiter, lineterminator="\n")
