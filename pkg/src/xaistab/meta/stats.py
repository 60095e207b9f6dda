"""Normal-approximation confidence intervals for per-instance metric values."""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np

from xaistab.errors import DomainError


def z_value(alpha: float) -> float:
    """Two-sided standard-normal critical value ``z_{1 - alpha/2}``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


def confidence_interval(values, alpha: float = 0.05) -> tuple[float, float]:
    """``mean -/+ z * s / sqrt(n)`` with ``s`` the sample standard deviation.

    >>> confidence_interval([0.0, 0.0, 0.0])
    (0.0, 0.0)
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size < 2:
        raise DomainError("a confidence interval needs at least 2 values")
    z = z_value(alpha)
    mean = float(v.mean())
    half = z * float(v.std(ddof=1)) / math.sqrt(v.size)
    return mean - half, mean + half
