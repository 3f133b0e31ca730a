from decimal import ROUND_DOWN, Decimal
from typing import Optional

from adjustment.settings import adjustment_settings
from bench.profile import NodeProfile
from utils.errors import AdjustmentError


def truncate_two_decimals(value: float) -> float:
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_DOWN))


def node_factor(w: float, local: NodeProfile, target: NodeProfile, truncate: Optional[bool] = None) -> float:
    """Runtime multiplier from the local machine to a target: w * cpu ratio + (1 - w) * io ratio."""
    truncate = adjustment_settings.truncate_factor if truncate is None else truncate
    if not 0.0 <= w <= 1.0:
        raise AdjustmentError(f"CPU weight must lie in [0, 1], got {w}")
    for profile in (local, target):
        if profile.cpu_score <= 0 or profile.io_score <= 0:
            raise AdjustmentError(f"node {profile.node!r} has a non-positive CPU or I/O score")

    if local.cpu_score == target.cpu_score and local.io_score == target.io_score:
        return 1.0
    factor = w * local.cpu_score / target.cpu_score + (1.0 - w) * local.io_score / target.io_score
    if truncate:
        factor = truncate_two_decimals(factor)
        if factor <= 0:
            raise AdjustmentError(f"node {target.node!r}: factor truncates to zero")
    return factor
