from typing import Iterable, List, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from sampling.settings import sampling_settings
from utils.errors import SamplingError


class PartitionPlan(BaseModel):
    """Halving ladder of partition sizes cut from one original input."""

    model_config = ConfigDict(frozen=True)

    original_size: int = Field(..., gt=0)
    sizes: List[int]
    labels: List[str]

    @model_validator(mode="after")
    def check_ladder(self) -> "PartitionPlan":
        if len(self.sizes) != len(self.labels):
            raise ValueError("sizes and labels differ in length")
        if sum(self.sizes) > self.original_size:
            raise ValueError("partition sizes exceed the original size")
        return self

    def size_of(self, label: str) -> int:
        return self.sizes[self.labels.index(label)]

    def to_csv(self) -> str:
        lines = ["label,size,fraction"]
        for label, size in zip(self.labels, self.sizes):
            lines.append(f"{label},{size},{size / self.original_size:.6g}")
        return "\n".join(lines) + "\n"


def plan_partitions(original_size: int, n: int) -> PartitionPlan:
    """s_1 = X/2 (rounded up), s_k = s_{k-1}/2, every partition holding at least one unit."""
    if n < 1:
        raise SamplingError(f"partition count must be >= 1, got {n}")
    if original_size < 2:
        raise SamplingError(f"original size {original_size} is too small to halve")

    sizes = [original_size - original_size // 2]
    for _ in range(n - 1):
        sizes.append(max(1, sizes[-1] // 2))
    if sum(sizes) > original_size:
        raise SamplingError(f"original size {original_size} is too small for {n} halvings")
    return PartitionPlan(original_size=original_size, sizes=sizes, labels=[f"p{k}" for k in range(1, n + 1)])


class Coverage(NamedTuple):
    fraction: float
    below_threshold: bool


def coverage_fraction(
    subset_sizes: Iterable[float], original_size: float, threshold: Optional[float] = None
) -> Coverage:
    """Cumulative size of a partition subset relative to the original input."""
    threshold = sampling_settings.coverage_threshold if threshold is None else threshold
    if original_size <= 0:
        raise SamplingError("original size must be > 0")
    fraction = sum(subset_sizes) / original_size
    return Coverage(fraction, fraction < threshold)
