from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

import pytest

from bench.profile import NodeProfile
from sampling.plan import plan_partitions
from traces.schema import FreqMode, RunRecord

FIXTURES = Path(__file__).parent / "fixtures"

FREQ_OLD = 2000.0
FREQ_NEW = 1600.0

# (task, intercept ms, slope ms/byte, CPU weight)
SYNTHETIC_TASKS: Sequence[Tuple[str, float, float, float]] = (
    ("align", 20_000.0, 2e-5, 0.9),
    ("index", 15_000.0, 1e-5, 0.3),
    ("sort", 30_000.0, 5e-6, 0.6),
)


@pytest.fixture
def three_node_dir() -> Path:
    return FIXTURES / "three_node"


@pytest.fixture
def three_node_profiles() -> Dict[str, NodeProfile]:
    return {
        "local": NodeProfile(node="local", cpu_events_per_sec=500, mem_score=20000, read_iops=500, write_iops=500),
        "N1": NodeProfile(node="N1", cpu_events_per_sec=400, mem_score=18000, read_iops=300, write_iops=300),
        "N2": NodeProfile(node="N2", cpu_events_per_sec=520, mem_score=20000, read_iops=500, write_iops=500),
    }


@pytest.fixture
def cluster_profiles() -> Dict[str, NodeProfile]:
    return {
        "local": NodeProfile(node="local", cpu_events_per_sec=500, flops=4e9, read_iops=500, write_iops=480),
        "fast": NodeProfile(node="fast", cpu_events_per_sec=650, flops=5e9, read_iops=700, write_iops=650),
        "slow": NodeProfile(node="slow", cpu_events_per_sec=350, read_iops=300, write_iops=310),
    }


def make_record(
    task: str,
    node: str,
    size: int,
    runtime: float,
    label: str,
    mode: FreqMode = FreqMode.NORMAL,
    workflow: str = "synthetic",
) -> RunRecord:
    return RunRecord(
        workflow=workflow,
        task=task,
        node=node,
        input_size_compressed=size // 2,
        input_size_uncompressed=size,
        runtime=runtime,
        freq_mode=mode,
        partition_label=label,
    )


@pytest.fixture
def synthetic_cluster(cluster_profiles: Dict[str, NodeProfile]) -> Callable[..., List[RunRecord]]:
    """Traces of a cluster whose runtimes follow the node-factor model exactly.

    Local runs are linear in size with a non-zero intercept; reduced-frequency runs
    grow by w * (freq_old / freq_new - 1); full-input runs on every node are the local
    runtime scaled by w * cpu ratio + (1 - w) * io ratio.
    """

    def build(original_size: int = 1_000_000_000, partitions: int = 5) -> List[RunRecord]:
        plan = plan_partitions(original_size, partitions)
        local = cluster_profiles["local"]
        records = []
        for task, intercept, slope, w in SYNTHETIC_TASKS:
            for label, size in zip(plan.labels, plan.sizes):
                runtime = intercept + slope * size
                records.append(make_record(task, "local", size, runtime, label))
                slowdown = 1.0 + w * (FREQ_OLD / FREQ_NEW - 1.0)
                records.append(make_record(task, "local", size, runtime * slowdown, label, FreqMode.REDUCED))
            full_runtime = intercept + slope * original_size
            for node, profile in sorted(cluster_profiles.items()):
                factor = w * local.cpu_score / profile.cpu_score + (1.0 - w) * local.io_score / profile.io_score
                records.append(make_record(task, node, original_size, full_runtime * factor, "full"))
        return records

    return build


@pytest.fixture
def record() -> Callable[..., RunRecord]:
    return make_record


@pytest.fixture
def frequencies() -> Tuple[float, float]:
    return FREQ_OLD, FREQ_NEW
