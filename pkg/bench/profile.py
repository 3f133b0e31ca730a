import io
from pathlib import Path
from typing import Dict, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from utils.errors import ProfileError
from utils.kvfile import format_kv, parse_kv, parse_number, read_text_file
from utils.log import logger

MANDATORY_FIELDS = ("cpu_events_per_sec", "read_iops", "write_iops")
OPTIONAL_FIELDS = ("flops", "mem_score")
ABSENT_VALUES = {"", "-", "none", "n/a", "na"}
PROFILE_SUFFIXES = {".profile", ".txt", ".csv"}


class NodeProfile(BaseModel):
    """Single-core microbenchmark scores of one machine."""

    model_config = ConfigDict(frozen=True)

    node: str = Field(..., min_length=1)
    cpu_events_per_sec: float = Field(..., gt=0, description="Prime-verification passes per second.")
    flops: Optional[float] = Field(None, gt=0, description="LU-solve floating point operations per second.")
    mem_score: Optional[float] = Field(None, ge=0, description="Memory throughput in MB/s.")
    read_iops: float = Field(..., gt=0, description="Sequential read blocks per second.")
    write_iops: float = Field(..., gt=0, description="Sequential write blocks per second.")

    @property
    def cpu_score(self) -> float:
        return self.cpu_events_per_sec

    @property
    def io_score(self) -> float:
        # Read throughput enters the node factor; the write score is kept for diagnostics.
        return self.read_iops


def _looks_like_csv(content: str) -> bool:
    for line in content.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            return "=" not in stripped
    return False


def _csv_values(content: str) -> Dict[str, str]:
    body = "\n".join(line for line in content.splitlines() if not line.lstrip().startswith("#"))
    frame = pd.read_csv(io.StringIO(body), dtype=str, keep_default_na=False, skipinitialspace=True)
    if len(frame) != 1:
        raise ProfileError(f"CSV profile must contain exactly one row, found {len(frame)}")
    return {str(column).strip().lower(): str(value).strip() for column, value in frame.iloc[0].items()}


def parse_profile(content: str, node: Optional[str] = None) -> NodeProfile:
    """Parse a `key = value` document (or a one-row CSV) into a validated NodeProfile."""
    values = _csv_values(content) if _looks_like_csv(content) else parse_kv(content)

    name = values.get("node") or node
    if not name:
        raise ProfileError("profile does not name its node")

    fields: Dict[str, object] = {"node": name}
    for field in MANDATORY_FIELDS + OPTIONAL_FIELDS:
        raw = values.get(field, "")
        if raw.lower() in ABSENT_VALUES:
            if field in MANDATORY_FIELDS:
                raise ProfileError(f"profile {name!r} is missing mandatory field {field!r}")
            continue
        try:
            fields[field] = parse_number(raw)
        except ValueError:
            raise ProfileError(f"profile {name!r}: field {field!r} is not numeric: {raw!r}")

    try:
        return NodeProfile.model_validate(fields)
    except ValidationError as e:
        field = e.errors()[0]["loc"][0]
        raise ProfileError(f"profile {name!r}: invalid {field!r}: {e.errors()[0]['msg']}")


def format_profile(profile: NodeProfile, header: Optional[str] = None) -> str:
    return format_kv(profile.model_dump(), header=header)


def read_profile(path: Union[str, Path]) -> NodeProfile:
    path = Path(path)
    return parse_profile(read_text_file(path, ProfileError), node=path.stem)


def load_profiles(directory: Union[str, Path]) -> Dict[str, NodeProfile]:
    """Read every profile file in a directory, keyed by node name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ProfileError(f"profile directory not found: {directory}")

    profiles: Dict[str, NodeProfile] = {}
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.name.startswith(".") or path.suffix not in PROFILE_SUFFIXES:
            continue
        profile = read_profile(path)
        if profile.node in profiles:
            raise ProfileError(f"node {profile.node!r} is profiled twice (second file: {path.name})")
        profiles[profile.node] = profile
        logger.debug(f"Loaded profile {profile.node} from {path.name}")

    if not profiles:
        raise ProfileError(f"no profile files in {directory}")
    return profiles
