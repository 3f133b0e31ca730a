from typing import Optional

import numpy as np

from bench.run_token import run_token
from bench.settings import bench_settings
from utils.dttm import clock, elapsed_since
from utils.errors import BenchmarkError
from utils.log import logger

MIN_BLOCK = 4 << 10


def bench_memory(block: Optional[int] = None, total: Optional[int] = None) -> float:
    """Sequential write-then-read throughput over one reused block, in MB/s (10^6 bytes).

    Every block pass writes the buffer once and reads it once, so the score counts
    2 * total bytes.
    """
    block = bench_settings.mem_block if block is None else block
    total = bench_settings.mem_total if total is None else total
    if block < MIN_BLOCK:
        raise BenchmarkError(f"memory block must be >= {MIN_BLOCK} bytes, got {block}")
    if block > total:
        raise BenchmarkError(f"memory block ({block}) is larger than the total ({total})")
    if total % block:
        raise BenchmarkError(f"memory total ({total}) is not a multiple of the block ({block})")

    passes = total // block
    buffer = np.empty(block, dtype=np.uint8)

    with run_token("memory benchmark"):
        start = clock()
        for i in range(passes):
            buffer.fill(i & 0xFF)
            buffer.max()
        elapsed = max(elapsed_since(start), 1e-9)

    score = 2 * total / elapsed / 1e6
    logger.info(f"Memory: {score:,.0f} MB/s ({passes} passes of {block} bytes)")
    return score
