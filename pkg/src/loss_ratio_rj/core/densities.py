"""Scalar log densities shared by the model and its conditionals.

Written out with ``scipy.special.gammaln`` instead of ``scipy.stats`` frozen
distributions: these sit on the sampler hot path.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

LOG_2PI = math.log(2.0 * math.pi)


def normal_logpdf(x: float | np.ndarray, mean: float, variance: float) -> float | np.ndarray:
    return -0.5 * (LOG_2PI + np.log(variance) + (x - mean) ** 2 / variance)


def std_normal_logpdf(x: float) -> float:
    return -0.5 * (LOG_2PI + x * x)


def gamma_logpdf(x: float, shape: float, rate: float) -> float:
    """Gamma log density with density proportional to x^(shape-1) exp(-rate x)."""
    if x <= 0.0:
        return -math.inf
    return float(shape * math.log(rate) - gammaln(shape) + (shape - 1.0) * math.log(x) - rate * x)
