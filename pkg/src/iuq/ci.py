"""Empirical quantiles and bootstrap confidence intervals.

The alpha-quantile of a size-n sample is fixed to the ceil(n*alpha)-th
order statistic (no interpolation), so quantiles are always elements of the
input sample and the empirical cdf evaluated at the returned quantile is
ceil(n*alpha)/n.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CIResult:
    """A two-sided interval with its nominal level and provenance tags."""

    lower: float
    upper: float
    alpha: float
    method: str  # "percentile" or "basic"
    n_used: int
    estimator: str = ""

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower endpoint exceeds upper endpoint")

    @property
    def width(self):
        return self.upper - self.lower

    def covers(self, value):
        return self.lower <= value <= self.upper


def empirical_quantile(values, alpha):
    """ceil(n*alpha)-th order statistic (1-indexed) of ``values``.

    Accepts 0 < alpha <= 1; alpha = 1 returns the maximum.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    rank = math.ceil(values.size * alpha)
    return float(np.sort(values)[rank - 1])


def percentile_ci(estimates, alpha, estimator=""):
    """Percentile bootstrap CI: [alpha/2, 1 - alpha/2] empirical quantiles."""
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size < 2:
        raise ValueError("need at least two estimates")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    srt = np.sort(estimates)
    lo = srt[math.ceil(srt.size * alpha / 2.0) - 1]
    hi = srt[math.ceil(srt.size * (1.0 - alpha / 2.0)) - 1]
    return CIResult(float(lo), float(hi), alpha, "percentile", estimates.size, estimator)


def basic_ci(estimates, eta_hat_at_theta_hat, alpha, estimator=""):
    """Basic bootstrap CI, the percentile interval reflected about 2*eta_hat."""
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size < 2:
        raise ValueError("need at least two estimates")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    center = 2.0 * float(eta_hat_at_theta_hat)
    srt = np.sort(estimates)
    q_lo = srt[math.ceil(srt.size * alpha / 2.0) - 1]
    q_hi = srt[math.ceil(srt.size * (1.0 - alpha / 2.0)) - 1]
    return CIResult(
        center - float(q_hi), center - float(q_lo), alpha, "basic", estimates.size, estimator
    )
