from typing import Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict


class EvaluationSettings(BaseSettings):
    """Evaluation and report settings that can be set using environment variables.

    Reference: https://docs.pydantic.dev/latest/usage/pydantic_settings/
    """

    model_config = SettingsConfigDict(env_prefix="LOTARU_EVALUATION_")

    percentiles: Tuple[int, ...] = (50, 75, 90, 95)
    float_format: str = "%.6g"
    # Partition label of the full-input runs that serve as prediction targets
    eval_label: str = "full"
    # Fixed so repeated SVG renders are byte-identical
    svg_hashsalt: str = "lotaru"


# Create an EvaluationSettings object
evaluation_settings = EvaluationSettings()
