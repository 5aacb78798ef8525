"""Reference statistics for the validation harness.

The standard normal CDF is evaluated with a fixed published polynomial
approximation instead of a math-library erf, so distances and reports are
bit-reproducible across platforms.
"""

from __future__ import annotations

import numpy as np

# Abramowitz & Stegun 7.1.26 rational approximation of erf on x >= 0,
# |error| <= 1.5e-7; the induced absolute error on the normal CDF is <= 7.5e-8.
_P = 0.3275911
_A1 = 0.254829592
_A2 = -0.284496736
_A3 = 1.421413741
_A4 = -1.453152027
_A5 = 1.061405429
_INV_SQRT2 = 0.7071067811865476


def normal_cdf(x):
    """Standard normal CDF, vectorized, absolute error <= 1.5e-7."""
    x = np.asarray(x, dtype=np.float64)
    z = np.abs(x) * _INV_SQRT2
    t = 1.0 / (1.0 + _P * z)
    poly = t * (_A1 + t * (_A2 + t * (_A3 + t * (_A4 + t * _A5))))
    erf = 1.0 - poly * np.exp(-z * z)
    cdf = 0.5 * (1.0 + np.where(x < 0, -erf, erf))
    if cdf.ndim == 0:
        return float(cdf)
    return cdf


def ks_distance(sample) -> float:
    """Sup-norm distance between the sample's empirical CDF and the standard normal."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("sample must be nonempty")
    cdf = np.atleast_1d(normal_cdf(x))
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def sample_skewness(sample) -> float:
    """Standardized third central moment of the sample."""
    x = np.asarray(sample, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two values")
    centered = x - x.mean()
    m2 = float(centered @ centered) / x.size
    if m2 == 0.0:
        return 0.0
    m3 = float((centered**3).sum()) / x.size
    return m3 / m2**1.5


def binomial_se(p_hat: float, n: int) -> float:
    """Standard error of an empirical proportion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(np.sqrt(max(p_hat, 0.0) * max(1.0 - p_hat, 0.0) / n))
