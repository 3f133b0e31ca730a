"""Flat `key = value` text files (profiles, model files, CLI config).

Parsing goes through python-dotenv, the same reader pydantic-settings uses
for env files, so comments and quoting behave identically everywhere.
"""

import io
from pathlib import Path
from typing import Dict, Mapping, Optional, Type, Union

from dotenv import dotenv_values

from utils.errors import LotaruError


def parse_kv(content: str) -> Dict[str, str]:
    values = dotenv_values(stream=io.StringIO(content))
    return {key.strip().lower(): value.strip() for key, value in values.items() if value is not None}


def read_text_file(path: Union[str, Path], error: Type[LotaruError] = LotaruError) -> str:
    """UTF-8 text of a file; unreadable or undecodable files raise `error` naming the path."""
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise error(f"{path}: not UTF-8 text, byte {e.object[e.start]:#04x} at offset {e.start}")
    except OSError as e:
        raise error(f"cannot read {path}: {e.strerror or e}")


def read_kv(path: Union[str, Path], error: Type[LotaruError] = LotaruError) -> Dict[str, str]:
    return parse_kv(read_text_file(path, error))


def format_kv(values: Mapping[str, object], header: Optional[str] = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    for key, value in values.items():
        if value is None:
            continue
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_number(raw: str) -> float:
    """Parse a numeric value, tolerating `,` and `_` thousands separators."""
    return float(raw.replace(",", "").replace("_", ""))
