import math
import time
from typing import Optional

from bench.run_token import run_token
from bench.settings import bench_settings
from utils.errors import BenchmarkError
from utils.log import logger


def verify_primes(max_prime: int) -> int:
    """One event: trial-divide every integer in 3..max_prime up to its square root.

    The algorithm is fixed so that scores are comparable across machines.
    """
    count = 0
    for candidate in range(3, max_prime + 1):
        limit = math.isqrt(candidate)
        divisor = 2
        while divisor <= limit:
            if candidate % divisor == 0:
                break
            divisor += 1
        else:
            count += 1
    return count


def bench_cpu_prime(limit_secs: Optional[float] = None, max_prime: Optional[int] = None) -> float:
    """Prime-verification passes per second on the calling thread."""
    limit_secs = bench_settings.cpu_limit_secs if limit_secs is None else limit_secs
    max_prime = bench_settings.max_prime if max_prime is None else max_prime
    if limit_secs <= 0:
        raise BenchmarkError(f"cpu time limit must be > 0 seconds, got {limit_secs}")
    if max_prime < 3:
        raise BenchmarkError(f"max_prime must be >= 3, got {max_prime}")

    with run_token("cpu benchmark"):
        events = 0
        start = time.perf_counter()
        deadline = start + limit_secs
        while True:
            verify_primes(max_prime)
            events += 1
            now = time.perf_counter()
            if now >= deadline:
                break
        score = events / (now - start)

    logger.info(f"CPU: {score:.2f} events/s ({events} passes, max prime {max_prime})")
    return score
