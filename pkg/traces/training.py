from collections import defaultdict
from typing import Dict, List, NamedTuple, Set, Tuple

from traces.schema import FreqMode, RunRecord, TrainingSet
from utils.errors import TraceError
from utils.log import logger


class EffectiveSize(NamedTuple):
    size: int
    compressed_fallback: bool


def effective_input_size(record: RunRecord) -> EffectiveSize:
    """The regression feature: uncompressed size, compressed size only as a flagged fallback.

    A zero uncompressed size next to a non-zero compressed size counts as absent.
    """
    uncompressed = record.input_size_uncompressed
    compressed = record.input_size_compressed
    if uncompressed is not None and (uncompressed > 0 or not compressed):
        return EffectiveSize(uncompressed, False)
    if compressed is not None:
        return EffectiveSize(compressed, True)
    raise TraceError(f"task {record.task!r} on {record.node!r}: both input sizes are absent")


def build_training_sets(records: List[RunRecord]) -> Dict[str, TrainingSet]:
    """Group local-run records per task and match normal/reduced runs on partition label."""
    nodes = {record.node for record in records}
    if len(nodes) > 1:
        raise TraceError(f"training records must come from one machine, found {sorted(nodes)}")

    seen: Set[Tuple[str, str, FreqMode]] = set()
    normal: Dict[str, List[Tuple[str, float, float]]] = defaultdict(list)
    reduced: Dict[str, List[Tuple[str, float, float]]] = defaultdict(list)
    fallbacks = 0

    for record in records:
        key = (record.task, record.partition_label, record.freq_mode)
        if key in seen:
            raise TraceError(
                f"duplicate record for task {record.task!r}, partition {record.partition_label!r}, "
                f"mode {record.freq_mode.value}"
            )
        seen.add(key)

        size = effective_input_size(record)
        fallbacks += size.compressed_fallback
        target = normal if record.freq_mode is FreqMode.NORMAL else reduced
        target[record.task].append((record.partition_label, float(size.size), record.runtime))

    if fallbacks:
        logger.warning(f"{fallbacks} record(s) use the compressed input size as a fallback")

    training_sets: Dict[str, TrainingSet] = {}
    for task in sorted(set(normal) | set(reduced)):
        reduced_by_label = {label: runtime for label, _, runtime in reduced[task]}
        pairs = [
            (label, time_old, reduced_by_label[label])
            for label, _, time_old in normal[task]
            if label in reduced_by_label
        ]
        training_sets[task] = TrainingSet(
            task=task,
            normal_runs=[(x, y) for _, x, y in normal[task]],
            normal_labels=[label for label, _, _ in normal[task]],
            reduced_runs=[(x, y) for _, x, y in reduced[task]],
            reduced_labels=[label for label, _, _ in reduced[task]],
            pairs=pairs,
        )
        if not pairs:
            logger.debug(f"Task {task}: no reduced-frequency pairs")
    return training_sets
