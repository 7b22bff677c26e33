"""Likelihood-ratio MANOVA test under a circular covariance structure.

Exact, characteristic-function and Normal-approximation null laws for
Lambda, random-sample-size mixtures, four high-dimensional competitors and
a Monte Carlo harness comparing them.
"""

from .errors import CircManovaError, DataError, NumericError
from .nulldist import (
    beta_product_model,
    cdf_lambda,
    cdf_w,
    normal_approx,
    p_value,
    quantile_lambda,
)
from .statistic import GroupedSample, lrt_statistic

__version__ = "0.1.0"

__all__ = [
    "CircManovaError",
    "DataError",
    "NumericError",
    "GroupedSample",
    "lrt_statistic",
    "beta_product_model",
    "cdf_lambda",
    "cdf_w",
    "normal_approx",
    "p_value",
    "quantile_lambda",
]
