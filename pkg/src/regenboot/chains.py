"""Finite-alphabet chain models with certified memory-decay constants.

Two kernel families are built in:

* :class:`FiniteOrderKernel` — exact finite memory ``m``; the conditional law
  depends only on the last ``m`` symbols, so the continuity rate vanishes from
  lag ``m`` on.
* :class:`GeometricMixtureKernel` — genuine unbounded memory.  The next symbol
  is drawn by first picking a lag ``L`` with ``P(L = l) = (1-theta) * theta**(l-1)``
  and then sampling from a base table conditioned on the symbol at that lag,
  i.e. ``p(a | history) = sum_l (1-theta) * theta**(l-1) * q(a | x[-l])``.

Both families have closed-form values for the uniform probability floor
(``delta``), the lag-``l`` continuity rate, and the exponential mixing rate,
so schedule admissibility can be decided exactly rather than estimated.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import math

import numpy as np

PROB_TOL = 1e-12  # row-sum tolerance; well above float64 accumulation error for |A| <= 64


@dataclass(frozen=True)
class Alphabet:
    """Finite symbol set {0, ..., size-1}."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.size}")


@dataclass(frozen=True)
class Observable:
    """Real-valued single-coordinate observable: a table of one value per symbol."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise ValueError("observable needs one value per symbol, alphabet size >= 2")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("observable values must be finite")
        object.__setattr__(self, "values", vals)
        table = np.asarray(vals, dtype=np.float64)
        table.setflags(write=False)
        object.__setattr__(self, "_table", table)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(len(self.values))

    def apply(self, symbols) -> np.ndarray:
        """Map a symbol sequence to its observable values."""
        return self._table[np.asarray(symbols)]


def _validate_rows(table: np.ndarray, what: str) -> None:
    if np.any(table < 0):
        raise ValueError(f"{what} has negative entries")
    gaps = np.abs(table.sum(axis=1) - 1.0)
    if np.any(gaps > PROB_TOL):
        i = int(np.argmax(gaps))
        raise ValueError(f"{what} row {i} sums to {table[i].sum():.17g}, not 1 within {PROB_TOL}")


def _freeze(array) -> np.ndarray:
    out = np.array(array, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FiniteOrderKernel:
    """Order-``m`` kernel: a row-stochastic table over contexts in A^m.

    Rows are indexed by the context code with the oldest symbol as the most
    significant base-``|A|`` digit (row-major over A^m), columns by the next
    symbol.
    """

    order: int
    table: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        table = _freeze(self.table)
        if table.ndim != 2:
            raise ValueError("transition table must be 2-dimensional")
        a = table.shape[1]
        if a < 2:
            raise ValueError("alphabet size must be >= 2")
        if table.shape[0] != a**self.order:
            raise ValueError(
                f"table has {table.shape[0]} rows, expected {a}**{self.order} = {a**self.order}"
            )
        _validate_rows(table, "transition table")
        object.__setattr__(self, "table", table)

    @property
    def alphabet_size(self) -> int:
        return self.table.shape[1]

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.alphabet_size)


@dataclass(frozen=True)
class GeometricMixtureKernel:
    """Unbounded-memory kernel mixing a one-symbol base table over geometric lags."""

    theta: float
    base: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        base = _freeze(self.base)
        if base.ndim != 2 or base.shape[0] != base.shape[1]:
            raise ValueError("base table must be square (one row per conditioning symbol)")
        if base.shape[1] < 2:
            raise ValueError("alphabet size must be >= 2")
        _validate_rows(base, "base table")
        object.__setattr__(self, "base", base)

    @property
    def alphabet_size(self) -> int:
        return self.base.shape[1]

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.alphabet_size)


Kernel = Union[FiniteOrderKernel, GeometricMixtureKernel]


def context_code(context: Sequence[int], size: int) -> int:
    """Base-``size`` code of a context given oldest..newest, oldest most significant."""
    code = 0
    for symbol in context:
        code = code * size + int(symbol)
    return code


def conditional_distribution(kernel: Kernel, context: Sequence[int]) -> np.ndarray:
    """Next-symbol law given a finite context (most recent symbol last).

    A finite-order kernel requires at least ``order`` symbols of context.  The
    geometric mixture accepts any nonempty context and extends it beyond its
    own length by repeating the oldest symbol, which puts the whole geometric
    tail weight on that symbol's base row.
    """
    ctx = np.asarray(context, dtype=np.int64)
    if ctx.ndim != 1 or ctx.size < 1:
        raise ValueError("context must be a nonempty symbol sequence")
    a = kernel.alphabet_size
    if np.any(ctx < 0) or np.any(ctx >= a):
        raise ValueError(f"context symbols must lie in 0..{a - 1}")
    if isinstance(kernel, FiniteOrderKernel):
        if ctx.size < kernel.order:
            raise ValueError(
                f"context of length {ctx.size} is too short for an order-{kernel.order} kernel"
            )
        return kernel.table[context_code(ctx[-kernel.order :], a)].copy()
    theta = kernel.theta
    length = ctx.size
    out = np.zeros(a, dtype=np.float64)
    weight = 1.0 - theta
    for lag in range(1, length):  # lag l reads the symbol l steps back
        out += weight * kernel.base[ctx[length - lag]]
        weight *= theta
    # all lags >= length fall on the oldest symbol; their total weight is theta**(length-1)
    out += theta ** (length - 1) * kernel.base[ctx[0]]
    return out


def delta_lower_bound(kernel: Kernel) -> float:
    """Certified uniform floor: every reachable conditional probability is >= delta.

    For the geometric mixture every conditional law is a convex combination of
    base rows, so the floor is the smallest base entry.
    """
    if isinstance(kernel, FiniteOrderKernel):
        table = kernel.table
    else:
        table = kernel.base
    positive = table[table > 0]
    return float(positive.min())


def continuity_rate(kernel: Kernel, lag: int) -> float:
    """Upper bound on how much the next-symbol law can move when two histories
    agree on their most recent ``lag`` symbols.

    Exact for both families: zero from the order on for a finite-order kernel,
    ``theta**lag * spread(base)`` for the geometric mixture.
    """
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    if isinstance(kernel, FiniteOrderKernel):
        m = kernel.order
        if lag >= m:
            return 0.0
        a = kernel.alphabet_size
        # group contexts sharing their last `lag` symbols; the worst per-symbol
        # gap within a group is the exact supremum
        rows = kernel.table.reshape(a ** (m - lag), a**lag, a)
        return float((rows.max(axis=0) - rows.min(axis=0)).max())
    spread = float((kernel.base.max(axis=0) - kernel.base.min(axis=0)).max())
    return kernel.theta**lag * spread


def mixing_exponent(kernel: Kernel) -> float:
    """Exponential decay rate of the continuity rates; ``inf`` for finite order."""
    if isinstance(kernel, FiniteOrderKernel):
        return math.inf
    return math.log(1.0 / kernel.theta)


def long_run_variance_estimate(trajectory, f: Observable, lag_window: int) -> float:
    """Autocovariance-truncation estimate of the long-run variance of f(X).

    Returns ``gamma_0 + 2 * sum_{j<=lag_window} gamma_j`` with empirical
    autocovariances (1/n normalization).  Diagnostic only: a strictly positive
    value supports the nondegeneracy hypothesis on the observable.
    """
    if lag_window < 0:
        raise ValueError("lag_window must be >= 0")
    y = f.apply(trajectory)
    n = y.size
    if n <= 10 * (lag_window + 1):
        raise ValueError(
            f"trajectory of length {n} too short for lag window {lag_window} "
            f"(need > {10 * (lag_window + 1)})"
        )
    y = y - y.mean()
    total = float(y @ y) / n
    for j in range(1, lag_window + 1):
        total += 2.0 * float(y[:-j] @ y[j:]) / n
    return total


@dataclass(frozen=True)
class HypothesisReport:
    """Certified constants and diagnostic flags for a kernel/observable pair.

    ``floor_ok`` — the probability floor is strictly positive;
    ``mixing_ok`` — memory decays exponentially (positive mixing exponent);
    ``variance_ok`` — the long-run variance estimate is strictly positive.
    """

    delta: float
    c: float
    sigma2_estimate: float
    floor_ok: bool
    mixing_ok: bool
    variance_ok: bool


def hypothesis_report(kernel: Kernel, f: Observable, trajectory, lag_window: int = 50) -> HypothesisReport:
    """Assemble the admissibility diagnostics from a kernel and a pilot trajectory."""
    delta = delta_lower_bound(kernel)
    c = mixing_exponent(kernel)
    sigma2 = long_run_variance_estimate(trajectory, f, lag_window)
    return HypothesisReport(
        delta=delta,
        c=c,
        sigma2_estimate=sigma2,
        floor_ok=delta > 0,
        mixing_ok=c > 0,
        variance_ok=sigma2 > 0,
    )
