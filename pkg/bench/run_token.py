"""Process-wide run token: benchmarks never run concurrently in one process."""

import threading
from contextlib import contextmanager
from typing import Iterator

from utils.errors import BenchmarkBusyError

_run_token = threading.Lock()


@contextmanager
def run_token(name: str) -> Iterator[None]:
    if not _run_token.acquire(blocking=False):
        raise BenchmarkBusyError(f"cannot start {name}: another benchmark is running")
    try:
        yield
    finally:
        _run_token.release()
