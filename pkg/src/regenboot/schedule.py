"""Block-count schedule m_k = floor(exp(alpha * k)) and its admissibility window."""

from __future__ import annotations

from dataclasses import dataclass

import math

from .errors import ResourceCapError

BLOCK_COUNT_CAP = 2**53  # beyond this, float exp loses integer resolution


def block_count(alpha: float, k: int) -> int:
    """Scheduled number of blocks, floor(exp(alpha * k))."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    value = math.exp(alpha * k)
    if value > BLOCK_COUNT_CAP:
        raise ResourceCapError(
            f"block count exp({alpha} * {k}) exceeds {BLOCK_COUNT_CAP}; experiment too large"
        )
    return int(math.floor(value))


@dataclass(frozen=True)
class AdmissibilityWindow:
    """Range of schedule exponents certified by the limit theorems.

    ``lower = 5 ln(1/delta)`` and ``upper = c - ln(1/delta)`` bound the
    exponents covered for the infinite-order chain; ``strong_mixing_ok``
    records the side condition ``c > 18 ln(1/delta)`` under which that window
    applies.  ``markov_lower = 5 ln(1/delta_inf)`` is the exponent floor for a
    sequence of order-k chains with uniform probability floor ``delta_inf``.
    """

    lower: float
    upper: float
    strong_mixing_ok: bool
    markov_lower: float

    @property
    def nonempty(self) -> bool:
        return self.upper > self.lower

    def contains(self, alpha: float) -> bool:
        return self.lower < alpha < self.upper


def admissibility_window(delta: float, c: float, delta_inf: float) -> AdmissibilityWindow:
    """Window of admissible schedule exponents from the certified constants.

    ``c = inf`` (finite-order kernels) gives an unbounded window with the
    mixing side condition trivially satisfied.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if not 0.0 < delta_inf <= 1.0:
        raise ValueError(f"delta_inf must lie in (0, 1], got {delta_inf}")
    if not c > 0.0:
        raise ValueError(f"mixing exponent c must be positive, got {c}")
    log_inv = math.log(1.0 / delta)
    return AdmissibilityWindow(
        lower=5.0 * log_inv,
        upper=c - log_inv,  # inf stays inf
        strong_mixing_ok=c > 18.0 * log_inv,
        markov_lower=5.0 * math.log(1.0 / delta_inf),
    )
