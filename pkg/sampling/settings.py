from pydantic_settings import BaseSettings, SettingsConfigDict


class SamplingSettings(BaseSettings):
    """Downsampling settings that can be set using environment variables.

    Reference: https://docs.pydantic.dev/latest/usage/pydantic_settings/
    """

    model_config = SettingsConfigDict(env_prefix="LOTARU_SAMPLING_")

    partitions: int = 10
    k_min: int = 2
    # Below this cumulative share of the original input, predictions scatter widely
    coverage_threshold: float = 0.10


# Create a SamplingSettings object
sampling_settings = SamplingSettings()
