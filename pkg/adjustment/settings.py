from pydantic_settings import BaseSettings, SettingsConfigDict


class AdjustmentSettings(BaseSettings):
    """Target-node adjustment settings that can be set using environment variables.

    Reference: https://docs.pydantic.dev/latest/usage/pydantic_settings/
    """

    model_config = SettingsConfigDict(env_prefix="LOTARU_ADJUSTMENT_")

    # CPU weight used when a task has no reduced-frequency run
    default_weight: float = 0.5
    # Truncate the node factor to two decimals before scaling
    truncate_factor: bool = False


# Create an AdjustmentSettings object
adjustment_settings = AdjustmentSettings()
