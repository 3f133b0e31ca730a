from typing import Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict


class EstimatorSettings(BaseSettings):
    """Model fitting settings that can be set using environment variables.

    Reference: https://docs.pydantic.dev/latest/usage/pydantic_settings/
    """

    model_config = SettingsConfigDict(env_prefix="LOTARU_ESTIMATOR_")

    # Zero-mean Gaussian prior on the standardised coefficients
    prior_precision: float = 1e-6
    # Inverse-Gamma(shape, rate) prior on the noise variance
    noise_shape: float = 1e-6
    noise_rate: float = 1e-6
    # Correlation gate: regression only when p > threshold
    pearson_threshold: float = 0.8
    # Gate on |p| instead of p
    pearson_abs: bool = False
    # Central credible levels reported with every prediction
    levels: Tuple[float, ...] = (0.5, 0.75, 0.95)


# Create an EstimatorSettings object
estimator_settings = EstimatorSettings()
