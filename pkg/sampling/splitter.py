"""Split record-oriented inputs into contiguous, disjoint partitions.

A partition plan is read as record-count proportions: partition k receives
floor(s_k / X * total) whole records, taken in input order. Records past the
last partition are still read so that malformed input anywhere is reported.
"""

import contextlib
from pathlib import Path
from typing import IO, Iterator, List, Optional, Protocol, TextIO, Union

from sampling.plan import PartitionPlan
from utils.errors import MalformedRecordError, SamplingError
from utils.log import logger


class RecordReader(Protocol):
    def records(self, stream: TextIO) -> Iterator[List[str]]: ...


class LineBlockReader:
    """Fixed-size blocks of lines, for inputs without per-record markers."""

    def __init__(self, lines_per_record: int = 1):
        if lines_per_record < 1:
            raise SamplingError(f"lines per record must be >= 1, got {lines_per_record}")
        self.lines_per_record = lines_per_record

    def check(self, index: int, lines: List[str]) -> None:
        pass

    def records(self, stream: TextIO) -> Iterator[List[str]]:
        index = 0
        while True:
            first = stream.readline()
            if first == "":
                return
            index += 1
            if not first.strip():
                rest = stream.read()
                if rest.strip():
                    raise MalformedRecordError(index, "blank line inside the input")
                return
            lines = [first]
            for _ in range(self.lines_per_record - 1):
                line = stream.readline()
                if line == "":
                    raise MalformedRecordError(
                        index, f"truncated record: {len(lines)} of {self.lines_per_record} lines"
                    )
                lines.append(line)
            self.check(index, lines)
            yield lines


class FastqReader(LineBlockReader):
    """Four-line FASTQ records: '@' header, sequence, '+' separator, quality."""

    def __init__(self) -> None:
        super().__init__(lines_per_record=4)

    def check(self, index: int, lines: List[str]) -> None:
        if not lines[0].startswith("@"):
            raise MalformedRecordError(index, "header line does not start with '@'")
        if not lines[2].startswith("+"):
            raise MalformedRecordError(index, "separator line does not start with '+'")
        if len(lines[1].rstrip("\r\n")) != len(lines[3].rstrip("\r\n")):
            raise MalformedRecordError(index, "sequence and quality lengths differ")


def count_records(stream: TextIO, reader: Optional[RecordReader] = None) -> int:
    reader = reader or FastqReader()
    try:
        return sum(1 for _ in reader.records(stream))
    except UnicodeDecodeError as e:
        raise SamplingError(f"input is not UTF-8 text, byte {e.object[e.start]:#04x} at offset {e.start}")


def partition_counts(plan: PartitionPlan, total_records: int) -> List[int]:
    return [size * total_records // plan.original_size for size in plan.sizes]


def split_records(
    stream: TextIO,
    plan: PartitionPlan,
    out_dir: Union[str, Path],
    reader: RecordReader,
    total_records: Optional[int] = None,
    prefix: str = "sample",
    suffix: str = ".txt",
) -> List[Path]:
    """Write one file per plan partition; returns the partition paths in plan order."""
    total_records = plan.original_size if total_records is None else total_records
    counts = partition_counts(plan, total_records)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise SamplingError(f"cannot create output directory {out_dir}: {e.strerror or e}")
    paths = [out_dir / f"{prefix}_{label}{suffix}" for label in plan.labels]

    current = 0
    written = 0
    handle: Optional[IO[str]] = None
    try:
        for lines in reader.records(stream):
            while current < len(counts) and written == counts[current]:
                if handle is not None:
                    handle.close()
                    handle = None
                current += 1
                written = 0
            if current >= len(counts):
                continue
            if handle is None:
                handle = paths[current].open("w", encoding="utf-8")
            handle.writelines(lines)
            written += 1
        if handle is not None:
            handle.close()
            handle = None
    except (MalformedRecordError, OSError, UnicodeDecodeError) as e:
        if handle is not None:
            handle.close()
        for path in paths:
            with contextlib.suppress(FileNotFoundError):
                path.unlink()
        if isinstance(e, MalformedRecordError):
            raise
        raise SamplingError(f"split into {out_dir} failed: {e}")

    # Empty partitions still get a file so every plan label maps to a path.
    for path in paths:
        path.touch(exist_ok=True)

    for label, count in zip(plan.labels, counts):
        logger.debug(f"Partition {label}: {count} record(s)")
    return paths


def split_fastq(
    stream: TextIO,
    plan: PartitionPlan,
    out_dir: Union[str, Path],
    total_records: Optional[int] = None,
    prefix: str = "sample",
) -> List[Path]:
    return split_records(stream, plan, out_dir, FastqReader(), total_records, prefix, ".fastq")
