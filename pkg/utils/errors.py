"""Error hierarchy shared by all packages.

Every error names the module that raised it so the CLI can report
`[module] cause` and pick an exit code without inspecting the message.
"""

from typing import Optional


class LotaruError(ValueError):
    module: str = "lotaru"
    exit_code: int = 1

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        return f"[{self.module}] {self.args[0]}"


class ConfigError(LotaruError):
    module = "cli"
    exit_code = 2


class TraceError(LotaruError):
    module = "trace-data"


class SchemaError(TraceError):
    exit_code = 2


class BenchmarkError(LotaruError):
    module = "microbench"


class BenchmarkBusyError(BenchmarkError):
    pass


class ProfileError(BenchmarkError):
    exit_code = 2


class SamplingError(LotaruError):
    module = "sampling"


class MalformedRecordError(SamplingError):
    def __init__(self, record_index: int, message: str):
        super().__init__(f"record {record_index}: {message}")
        self.record_index = record_index


class EstimatorError(LotaruError):
    module = "estimator"


class SingularDesignError(EstimatorError):
    """Raised when the regression design is degenerate; callers fall back to the median."""


class AdjustmentError(LotaruError):
    module = "adjustment"


class BaselineError(LotaruError):
    module = "baselines"


class EvaluationError(LotaruError):
    module = "evaluation"
