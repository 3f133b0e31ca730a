import time
from datetime import datetime, timezone


def current_utc() -> datetime:
    return datetime.now(timezone.utc)


def current_utc_str(format: str = "%Y-%m-%dT%H:%M:%SZ") -> str:
    return current_utc().strftime(format)


def clock() -> float:
    """Monotonic benchmark clock in seconds; only differences are meaningful."""
    return time.perf_counter()


def elapsed_since(start: float) -> float:
    """Seconds elapsed since a `clock()` reading."""
    return clock() - start
