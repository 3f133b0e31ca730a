from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

SIZE_UNITS: Dict[str, int] = {
    "b": 1,
    "kb": 1_000,
    "mb": 1_000_000,
    "gb": 1_000_000_000,
    "kib": 1 << 10,
    "mib": 1 << 20,
    "gib": 1 << 30,
}

RUNTIME_UNITS: Dict[str, float] = {
    "ms": 1.0,
    "s": 1_000.0,
    "min": 60_000.0,
}


class FreqMode(str, Enum):
    NORMAL = "Normal"
    REDUCED = "Reduced"

    @classmethod
    def parse(cls, raw: str) -> "FreqMode":
        for mode in cls:
            if mode.value.lower() == raw.strip().lower():
                return mode
        raise ValueError(f"unknown frequency mode: {raw!r}")


class RunRecord(BaseModel):
    """One observed task execution. Sizes are bytes, runtime is milliseconds."""

    model_config = ConfigDict(frozen=True)

    workflow: str = Field(..., description="Workflow the task belongs to.")
    task: str = Field(..., description="Abstract task name.")
    node: str = Field(..., description="Machine the task ran on.")
    input_size_compressed: Optional[int] = Field(None, ge=0, description="On-disk input size in bytes.")
    input_size_uncompressed: Optional[int] = Field(None, ge=0, description="Logical input size in bytes.")
    runtime: float = Field(..., gt=0, description="Wall time in milliseconds.")
    freq_mode: FreqMode = FreqMode.NORMAL
    partition_label: str = Field(..., description="Downsampled partition that produced this record.")
    cpu_percent: Optional[float] = Field(None, description="%cpu column when present.")
    rss: Optional[int] = Field(None, description="Resident set size when present.")

    @property
    def size_inverted(self) -> bool:
        """True when the compressed size exceeds the uncompressed one (validation warning)."""
        return (
            self.input_size_compressed is not None
            and self.input_size_uncompressed is not None
            and self.input_size_uncompressed < self.input_size_compressed
        )


class ColumnMapping(BaseModel):
    """Maps RunRecord fields to trace columns, plus the units those columns use."""

    workflow: str = "Workflow"
    task: str = "Task"
    node: str = "Machine"
    runtime: str = "Realtime"
    input_size_compressed: str = "InputSizeCompressed"
    input_size_uncompressed: str = "InputSizeUncompressed"
    freq_mode: str = "FreqMode"
    partition_label: str = "PartitionLabel"
    cpu_percent: Optional[str] = "%cpu"
    rss: Optional[str] = "rss"
    delimiter: str = ","
    size_unit: str = "B"
    runtime_unit: str = "ms"

    @field_validator("size_unit")
    @classmethod
    def check_size_unit(cls, unit: str) -> str:
        if unit.lower() not in SIZE_UNITS:
            raise ValueError(f"size_unit must be one of {sorted(SIZE_UNITS)}")
        return unit

    @field_validator("runtime_unit")
    @classmethod
    def check_runtime_unit(cls, unit: str) -> str:
        if unit.lower() not in RUNTIME_UNITS:
            raise ValueError(f"runtime_unit must be one of {sorted(RUNTIME_UNITS)}")
        return unit

    @property
    def size_factor(self) -> int:
        return SIZE_UNITS[self.size_unit.lower()]

    @property
    def runtime_factor(self) -> float:
        return RUNTIME_UNITS[self.runtime_unit.lower()]

    def required_columns(self) -> List[str]:
        return [
            self.workflow,
            self.task,
            self.node,
            self.runtime,
            self.input_size_compressed,
            self.input_size_uncompressed,
            self.freq_mode,
            self.partition_label,
        ]


class TrainingSet(BaseModel):
    """Per-task observations from the normal-speed and reduced-speed local runs."""

    model_config = ConfigDict(frozen=True)

    task: str
    normal_runs: List[Tuple[float, float]] = Field(default_factory=list, description="(bytes, ms) pairs.")
    reduced_runs: List[Tuple[float, float]] = Field(default_factory=list, description="(bytes, ms) pairs.")
    pairs: List[Tuple[str, float, float]] = Field(
        default_factory=list, description="(partition_label, time_old ms, time_new ms) per matched partition."
    )
    normal_labels: List[str] = Field(default_factory=list, description="Partition label of each normal run.")
    reduced_labels: List[str] = Field(default_factory=list, description="Partition label of each reduced run.")

    @property
    def xs(self) -> List[float]:
        return [x for x, _ in self.normal_runs]

    @property
    def ys(self) -> List[float]:
        return [y for _, y in self.normal_runs]

    def restrict(self, labels: Set[str]) -> "TrainingSet":
        """Training set limited to the given partition labels."""
        kept = [i for i, label in enumerate(self.normal_labels) if label in labels]
        kept_reduced = [i for i, label in enumerate(self.reduced_labels) if label in labels]
        return TrainingSet(
            task=self.task,
            normal_runs=[self.normal_runs[i] for i in kept],
            normal_labels=[self.normal_labels[i] for i in kept],
            reduced_runs=[self.reduced_runs[i] for i in kept_reduced],
            reduced_labels=[self.reduced_labels[i] for i in kept_reduced],
            pairs=[pair for pair in self.pairs if pair[0] in labels],
        )
