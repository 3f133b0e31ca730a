import time
from typing import Optional

import numpy as np

from bench.run_token import run_token
from bench.settings import bench_settings
from utils.errors import BenchmarkError
from utils.log import logger


def linpack_ops(n: int) -> float:
    """Floating point operations of one LU factorisation plus solve."""
    return 2.0 / 3.0 * n**3 + 2.0 * n**2


def lu_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting followed by back substitution.

    Row updates use numpy element-wise operations rather than BLAS calls, so the
    solve stays on the calling thread.
    """
    a = a.copy()
    b = b.copy()
    n = a.shape[0]
    for k in range(n - 1):
        pivot = k + int(np.argmax(np.abs(a[k:, k])))
        if a[pivot, k] == 0.0:
            raise BenchmarkError("matrix is singular")
        if pivot != k:
            a[[k, pivot]] = a[[pivot, k]]
            b[[k, pivot]] = b[[pivot, k]]
        multipliers = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= multipliers[:, np.newaxis] * a[k, k:]
        b[k + 1 :] -= multipliers * b[k]

    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - np.dot(a[i, i + 1 :], x[i + 1 :])) / a[i, i]
    return x


def bench_flops(n: Optional[int] = None, min_secs: Optional[float] = None, seed: int = 1325) -> float:
    """LINPACK-style score: work formula divided by the best observed solve time."""
    n = bench_settings.flops_n if n is None else n
    min_secs = bench_settings.flops_min_secs if min_secs is None else min_secs
    if n < 2:
        raise BenchmarkError(f"matrix dimension must be >= 2, got {n}")

    rng = np.random.default_rng(seed)
    a = rng.uniform(-0.5, 0.5, size=(n, n))
    b = a.sum(axis=1)

    with run_token("flops benchmark"):
        best = float("inf")
        iterations = 0
        start = time.perf_counter()
        while True:
            solve_start = time.perf_counter()
            lu_solve(a, b)
            end = time.perf_counter()
            best = min(best, end - solve_start)
            iterations += 1
            if end - start >= min_secs:
                break

    # Tiny matrices can finish below the timer resolution.
    best = max(best, 1e-9)
    score = linpack_ops(n) / best
    logger.info(f"FLOPS: {score:,.0f} (n={n}, {iterations} solves)")
    return score
