from pathlib import Path
from typing import Annotated, Any, Dict, Optional, Tuple

from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict

from evaluation.operator import get_available_estimators
from traces.schema import ColumnMapping
from utils.errors import ConfigError
from utils.kvfile import read_kv

# RunRecord fields whose trace column can be renamed with `column_<field>`
MAPPED_COLUMNS = (
    "workflow",
    "task",
    "node",
    "runtime",
    "input_size_compressed",
    "input_size_uncompressed",
    "freq_mode",
    "partition_label",
    "cpu_percent",
    "rss",
)


class CliSettings(BaseSettings):
    """Run configuration that can be set using environment variables, a config file or flags.

    Reference: https://docs.pydantic.dev/latest/usage/pydantic_settings/
    """

    model_config = SettingsConfigDict(env_prefix="LOTARU_")

    # Caps per-task training and matrix assembly parallelism (LOTARU_THREADS)
    threads: Optional[int] = Field(None, ge=1)
    # Central credible levels written by `predict`
    levels: Annotated[Tuple[float, ...], NoDecode] = (0.5, 0.95)
    estimator: str = "lotaru"
    # Truncate node factors to two decimals before scaling
    truncate: bool = False
    # Gate the regression on |p| instead of p
    pearson_abs: bool = False
    # CPU frequencies (MHz) of the normal and reduced-frequency local runs
    freq_old: Optional[float] = Field(None, gt=0)
    freq_new: Optional[float] = Field(None, gt=0)
    local: Optional[str] = None
    eval_label: Optional[str] = None
    # Ladder length for `plan-samples` and `split`, the sampling default when unset
    partitions: Optional[int] = Field(None, ge=1)
    # Node name and scratch directory used by `bench`
    node: Optional[str] = None
    io_path: Optional[Path] = None
    # Trace layout
    delimiter: str = ","
    size_unit: str = "B"
    runtime_unit: str = "ms"
    # Column names, unset keeps the default trace header
    column_workflow: Optional[str] = None
    column_task: Optional[str] = None
    column_node: Optional[str] = None
    column_runtime: Optional[str] = None
    column_input_size_compressed: Optional[str] = None
    column_input_size_uncompressed: Optional[str] = None
    column_freq_mode: Optional[str] = None
    column_partition_label: Optional[str] = None
    column_cpu_percent: Optional[str] = None
    column_rss: Optional[str] = None

    @field_validator("levels", mode="before")
    @classmethod
    def split_levels(cls, levels: Any) -> Any:
        if isinstance(levels, str):
            return tuple(float(level) for level in levels.replace(";", ",").split(",") if level.strip())
        return levels

    @field_validator("levels")
    @classmethod
    def check_levels(cls, levels: Tuple[float, ...]) -> Tuple[float, ...]:
        if not levels:
            raise ValueError("at least one credible level is required")
        for level in levels:
            if not 0.0 < level < 1.0:
                raise ValueError(f"credible level must lie in (0, 1), got {level}")
        return tuple(sorted(set(levels)))

    @field_validator("estimator")
    @classmethod
    def check_estimator(cls, estimator: str) -> str:
        if estimator not in get_available_estimators():
            raise ValueError(f"unknown estimator {estimator!r}, expected one of {get_available_estimators()}")
        return estimator

    @model_validator(mode="after")
    def check_frequencies(self) -> "CliSettings":
        if self.freq_old is not None and self.freq_new is not None and self.freq_old <= self.freq_new:
            raise ValueError(f"freq_old ({self.freq_old}) must exceed freq_new ({self.freq_new})")
        return self

    def column_mapping(self) -> ColumnMapping:
        columns = {field: getattr(self, f"column_{field}") for field in MAPPED_COLUMNS}
        try:
            return ColumnMapping(
                delimiter=self.delimiter,
                size_unit=self.size_unit,
                runtime_unit=self.runtime_unit,
                **{field: name for field, name in columns.items() if name},
            )
        except ValidationError as e:
            raise ConfigError(f"invalid trace layout: {e.errors()[0]['msg']}")


def load_config(config: Optional[Path] = None, **flags: Any) -> CliSettings:
    """Flags override the config file, which overrides the environment and the defaults."""
    values: Dict[str, Any] = read_kv(config, ConfigError) if config is not None else {}
    values.update({key: value for key, value in flags.items() if value is not None})
    try:
        return CliSettings(**values)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"]) or "config"
        raise ConfigError(f"{location}: {error['msg']}")
