"""Conjugate Bayesian linear regression of runtime on input size.

The model is y = b0 + b1 * x + e with e ~ N(0, s2), a zero-mean Gaussian prior
b ~ N(0, s2 / precision * I) on the coefficients and s2 ~ InvGamma(shape, rate).
x is standardised and y centred before the update, so the prior precision acts
on dimensionless coefficients whatever the byte scale of the inputs. The
posterior predictive is a Student-t distribution with n - 2 degrees of freedom
in the limit of a vague prior.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from estimator.settings import estimator_settings
from utils.errors import SingularDesignError


class BayesPrior(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float = Field(default_factory=lambda: estimator_settings.prior_precision, gt=0)
    noise_shape: float = Field(default_factory=lambda: estimator_settings.noise_shape, gt=0)
    noise_rate: float = Field(default_factory=lambda: estimator_settings.noise_rate, gt=0)


class BayesPosterior(BaseModel):
    """Normal-inverse-gamma posterior over (intercept, slope) in standardised coordinates."""

    model_config = ConfigDict(frozen=True)

    mean_standardized: Tuple[float, float]
    precision_matrix: Tuple[Tuple[float, float], Tuple[float, float]]
    noise_shape: float
    noise_rate: float
    x_mean: float
    x_scale: float
    y_mean: float

    @property
    def df(self) -> float:
        return 2.0 * self.noise_shape

    @property
    def noise_variance(self) -> float:
        if self.noise_shape > 1.0:
            return self.noise_rate / (self.noise_shape - 1.0)
        return self.noise_rate / self.noise_shape

    def _scale_matrix(self) -> np.ndarray:
        return self.noise_rate / self.noise_shape * np.linalg.inv(np.array(self.precision_matrix))

    @property
    def slope(self) -> float:
        return self.mean_standardized[1] / self.x_scale

    @property
    def intercept(self) -> float:
        return self.y_mean + self.mean_standardized[0] - self.slope * self.x_mean

    @property
    def mean(self) -> Tuple[float, float]:
        """Posterior mean of (intercept, slope) in input units."""
        return self.intercept, self.slope

    @property
    def covariance(self) -> List[List[float]]:
        """Posterior covariance of (intercept, slope) in input units."""
        jacobian = np.array([[1.0, -self.x_mean / self.x_scale], [0.0, 1.0 / self.x_scale]])
        scale = self._scale_matrix()
        if self.df > 2.0:
            scale = scale * self.df / (self.df - 2.0)
        return (jacobian @ scale @ jacobian.T).tolist()

    def predictive(self, x: float) -> Tuple[float, float, float]:
        """Location, scale and degrees of freedom of the Student-t predictive at x."""
        z = np.array([1.0, (x - self.x_mean) / self.x_scale])
        location = self.y_mean + float(z @ np.array(self.mean_standardized))
        spread = 1.0 + float(z @ np.linalg.solve(np.array(self.precision_matrix), z))
        scale = float(np.sqrt(self.noise_rate / self.noise_shape * spread))
        return location, scale, self.df


def fit_bayes_lr(xs: Sequence[float], ys: Sequence[float], prior: Optional[BayesPrior] = None) -> BayesPosterior:
    prior = prior or BayesPrior()
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise SingularDesignError(f"regression needs at least 2 paired points, got {x.size} and {y.size}")

    x_mean = float(x.mean())
    x_scale = float(x.std())
    if x_scale == 0.0 or not np.isfinite(x_scale):
        raise SingularDesignError("all input sizes are equal, use the median fallback")

    y_mean = float(y.mean())
    design = np.column_stack([np.ones_like(x), (x - x_mean) / x_scale])
    centred = y - y_mean

    precision = prior.precision * np.eye(2) + design.T @ design
    if np.linalg.cond(precision) > 1e12:
        raise SingularDesignError("regression design is ill-conditioned, use the median fallback")
    mean = np.linalg.solve(precision, design.T @ centred)

    # Intercept and slope use up two degrees of freedom; two points leave none for the noise.
    shape = prior.noise_shape + (x.size - 2) / 2.0
    residual = float(centred @ centred - mean @ precision @ mean)
    rate = prior.noise_rate + 0.5 * max(residual, 0.0)

    return BayesPosterior(
        mean_standardized=(float(mean[0]), float(mean[1])),
        precision_matrix=(
            (float(precision[0, 0]), float(precision[0, 1])),
            (float(precision[1, 0]), float(precision[1, 1])),
        ),
        noise_shape=shape,
        noise_rate=rate,
        x_mean=x_mean,
        x_scale=x_scale,
        y_mean=y_mean,
    )
