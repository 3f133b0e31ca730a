from pathlib import Path
from typing import Optional, Union

from bench.cpu import bench_cpu_prime
from bench.flops import bench_flops
from bench.io import bench_io_sequential
from bench.memory import bench_memory
from bench.profile import NodeProfile
from utils.log import logger


def run_all(
    node: str,
    cpu_limit_secs: Optional[float] = None,
    max_prime: Optional[int] = None,
    flops_n: Optional[int] = None,
    flops_min_secs: Optional[float] = None,
    mem_block: Optional[int] = None,
    mem_total: Optional[int] = None,
    io_file_size: Optional[int] = None,
    io_block: Optional[int] = None,
    io_path: Union[str, Path, None] = None,
) -> NodeProfile:
    """Run the four single-threaded benchmarks one after another and build the node profile."""
    logger.info(f"Profiling node {node}")
    cpu = bench_cpu_prime(cpu_limit_secs, max_prime)
    flops = bench_flops(flops_n, flops_min_secs)
    memory = bench_memory(mem_block, mem_total)
    io = bench_io_sequential(io_file_size, io_block, io_path)
    return NodeProfile(
        node=node,
        cpu_events_per_sec=cpu,
        flops=flops,
        mem_score=memory,
        read_iops=io.read_iops,
        write_iops=io.write_iops,
    )
