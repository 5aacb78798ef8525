"""Canonical order-k Markov approximation and maximal coupling with the source chain.

The canonical approximation of a chain is the order-k Markov chain whose
transition law is the conditional law of the chain given its last k symbols.
For finite-order sources it is computed exactly; for geometric mixtures it is
estimated from a long trajectory.  A coupled pair evolves both chains step by
step through a maximal coupling of their conditional laws, so the per-step
disagreement probability equals the total-variation distance between those
laws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chains import (
    FiniteOrderKernel,
    GeometricMixtureKernel,
    Kernel,
    Observable,
    PROB_TOL,
    _freeze,
    _validate_rows,
)
from .errors import ResourceCapError, StationarityError
from .rng import SeedSpec

CONTEXT_TABLE_CAP = 2**20
POWER_ITERATION_CAP = 10**6


@dataclass(frozen=True)
class OrderKKernel:
    """Order-k Markov transition table over contexts in A^k.

    Rows are indexed by the base-``|A|`` context code, oldest symbol most
    significant.  ``unobserved`` lists context codes whose row was never seen
    when the table was estimated from data (those rows are uniform fillers).
    """

    k: int
    table: np.ndarray
    unobserved: frozenset = frozenset()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"order k must be >= 1, got {self.k}")
        table = _freeze(self.table)
        a = table.shape[1] if table.ndim == 2 else 0
        if table.ndim != 2 or a < 2 or table.shape[0] != a**self.k:
            raise ValueError("table must have |A|**k rows and |A| >= 2 columns")
        _validate_rows(table, "order-k table")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "unobserved", frozenset(int(i) for i in self.unobserved))

    @property
    def alphabet_size(self) -> int:
        return self.table.shape[1]

    @property
    def delta_k(self) -> float:
        """Smallest positive transition probability in the table."""
        positive = self.table[self.table > 0]
        return float(positive.min())


@dataclass(frozen=True)
class CoupledPair:
    """Jointly simulated chain and approximation sharing one burn-in past."""

    chain: np.ndarray
    approximation: np.ndarray
    first_discrepancy: Optional[int]  # 1-based position, None if identical

    def __post_init__(self):
        if len(self.chain) != len(self.approximation):
            raise ValueError("coupled trajectories must have equal length")


def canonical_from_kernel(kernel: Kernel, k: int) -> OrderKKernel:
    """Exact canonical order-k approximation of a finite-order kernel.

    For ``k >= order`` each row copies the source row of its length-``order``
    suffix.  For ``k < order`` rows average the source law over the stationary
    conditional distribution of the unseen (older) prefix.
    """
    if isinstance(kernel, GeometricMixtureKernel):
        raise ValueError(
            "exact canonical approximation needs a finite-order source; "
            "estimate from a trajectory instead"
        )
    if k < 1:
        raise ValueError(f"order k must be >= 1, got {k}")
    a = kernel.alphabet_size
    m = kernel.order
    if a ** max(k, m) > CONTEXT_TABLE_CAP:
        raise ResourceCapError(
            f"context table size {a}**{max(k, m)} exceeds cap {CONTEXT_TABLE_CAP}"
        )
    if k >= m:
        # row of context (c_1..c_k) = source row of its suffix (c_{k-m+1}..c_k)
        rows = np.broadcast_to(
            kernel.table.reshape((1, a**m, a)), (a ** (k - m), a**m, a)
        ).reshape(a**k, a)
        return OrderKKernel(k=k, table=rows.copy())
    source = OrderKKernel(k=m, table=kernel.table)
    pi = stationary_distribution(source)
    # weight of each unseen (older) prefix p given the kept suffix s:
    # pi(p ++ s) / sum_p' pi(p' ++ s); prefixes are the high digits of the code
    weights = pi.reshape(a ** (m - k), a**k)
    totals = weights.sum(axis=0)
    if np.any(totals <= 0):
        raise StationarityError("a length-k context has zero stationary mass")
    rows = np.einsum(
        "ps,psa->sa", weights / totals, kernel.table.reshape(a ** (m - k), a**k, a)
    )
    return OrderKKernel(k=k, table=rows)


def _kgram_codes(trajectory: np.ndarray, k: int, a: int) -> np.ndarray:
    """Base-``a`` codes of every length-k window, oldest symbol most significant."""
    n = trajectory.size
    if n < k:
        raise ValueError(f"trajectory of length {n} has no length-{k} windows")
    codes = np.zeros(n - k + 1, dtype=np.int64)
    for i in range(k):
        codes = codes * a + trajectory[i : n - k + 1 + i]
    return codes


def canonical_from_trajectory(trajectory, k: int, alphabet_size: int) -> OrderKKernel:
    """Empirical order-k transition table from observed k-gram counts.

    Contexts with zero observed transitions get uniform filler rows and are
    reported in ``unobserved`` so downstream users can reject them when they
    matter.
    """
    traj = np.asarray(trajectory, dtype=np.int64)
    a = int(alphabet_size)
    if a < 2:
        raise ValueError("alphabet size must be >= 2")
    if traj.size < k + 1:
        raise ValueError(f"trajectory of length {traj.size} has no order-{k} transitions")
    if a ** (k + 1) > CONTEXT_TABLE_CAP:
        raise ResourceCapError(f"context table size {a}**{k + 1} exceeds cap {CONTEXT_TABLE_CAP}")
    codes = _kgram_codes(traj, k, a)
    counts = np.bincount(codes[:-1] * a + traj[k:], minlength=a ** (k + 1)).reshape(a**k, a)
    totals = counts.sum(axis=1)
    observed = totals > 0
    table = np.full((a**k, a), 1.0 / a)
    table[observed] = counts[observed] / totals[observed, None]
    unobserved = frozenset(int(i) for i in np.flatnonzero(~observed))
    return OrderKKernel(k=k, table=table, unobserved=unobserved)


def stationary_distribution(kernel: OrderKKernel, tol: float = 1e-12) -> np.ndarray:
    """Stationary law over contexts by power iteration.

    The returned vector satisfies ``L1(pi P, pi) <= tol`` and sums to 1 within
    1e-12; raises if the iteration cap is hit first.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = kernel.alphabet_size
    nctx = kernel.table.shape[0]
    # successor of context code c under symbol b: drop the oldest digit, append b
    targets = ((np.arange(nctx)[:, None] * a + np.arange(a)[None, :]) % nctx).ravel()
    flows = kernel.table
    pi = np.full(nctx, 1.0 / nctx)
    for _ in range(POWER_ITERATION_CAP):
        nxt = np.bincount(targets, weights=(pi[:, None] * flows).ravel(), minlength=nctx)
        gap = float(np.abs(nxt - pi).sum())
        pi = nxt / nxt.sum()
        if gap <= tol:
            # one application of a stochastic matrix is L1-nonexpansive, so the
            # residual of the returned iterate is also <= tol
            return pi
    raise StationarityError(
        f"power iteration did not reach L1 tolerance {tol} within {POWER_ITERATION_CAP} iterations"
    )


def markov_mean(kernel: OrderKKernel, f: Observable) -> float:
    """Stationary mean of the observable under the order-k chain."""
    a = kernel.alphabet_size
    pi = stationary_distribution(kernel)
    # the last symbol of a context is its least significant digit
    by_symbol = pi.reshape(a ** (kernel.k - 1), a).sum(axis=0)
    return float(by_symbol @ f.apply(np.arange(a)))


def _check_probability_vector(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise ValueError(f"{name} must be a probability vector over at least two symbols")
    if np.any(p < 0) or abs(float(p.sum()) - 1.0) > PROB_TOL:
        raise ValueError(f"{name} is not a probability vector")
    return p


def _inverse_cdf(row: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(np.cumsum(row), u, side="right"))
    return min(idx, row.size - 1)


def maximal_coupling_step(p, q, rng: np.random.Generator) -> tuple:
    """One maximally coupled draw (x, y, agreed) with x ~ p and y ~ q.

    With probability ``sum(min(p, q))`` both symbols come from the normalized
    overlap; otherwise x is drawn from the normalized positive part of p-q and
    y from that of q-p.  The disagreement probability is exactly the
    total-variation distance between p and q.
    """
    p = _check_probability_vector(p, "p")
    q = _check_probability_vector(q, "q")
    if p.size != q.size:
        raise ValueError("p and q must live on the same alphabet")
    overlap = np.minimum(p, q)
    omega = float(overlap.sum())
    # identical laws couple identically regardless of rounding in omega
    if np.array_equal(p, q) or float(rng.random()) < omega:
        x = _inverse_cdf(overlap / omega, float(rng.random()))
        return x, x, True
    residual_x = p - overlap
    residual_y = q - overlap
    x = _inverse_cdf(residual_x / residual_x.sum(), float(rng.random()))
    y = _inverse_cdf(residual_y / residual_y.sum(), float(rng.random()))
    return x, y, False


class _MixtureLawTracker:
    """Incremental conditional law of a geometric mixture along a realized past.

    Maintains the geometric lag weight carried by each symbol; the conditional
    law is ``weights @ base``.  The all-zeros pre-history starts all weight on
    symbol 0.  Weights are renormalized on read to stop rounding drift over
    long runs.
    """

    def __init__(self, kernel: GeometricMixtureKernel):
        self.theta = kernel.theta
        self.base = kernel.base
        self.weights = np.zeros(kernel.alphabet_size)
        self.weights[0] = 1.0

    def law(self) -> np.ndarray:
        law = self.weights @ self.base
        return law / law.sum()

    def push(self, symbol: int) -> None:
        self.weights *= self.theta
        self.weights[symbol] += 1.0 - self.theta


class _FiniteOrderLawTracker:
    """Conditional law of a finite-order kernel along a realized past."""

    def __init__(self, kernel: FiniteOrderKernel):
        self.table = kernel.table
        self.a = kernel.alphabet_size
        self.tail = self.a ** (kernel.order - 1)
        self.code = 0  # all-zeros pre-history

    def law(self) -> np.ndarray:
        return self.table[self.code]

    def push(self, symbol: int) -> None:
        self.code = (self.code % self.tail) * self.a + symbol


def _law_tracker(kernel: Kernel):
    if isinstance(kernel, FiniteOrderKernel):
        return _FiniteOrderLawTracker(kernel)
    return _MixtureLawTracker(kernel)


def coupled_pair_trajectories(
    kernel: Kernel, approx: OrderKKernel, n: int, burn_in: int, seed: SeedSpec
) -> CoupledPair:
    """Evolve the chain and its order-k approximation under per-step maximal coupling.

    The chain runs alone through the burn-in; the approximation adopts the
    realized burn-in past.  After that, each step performs one maximal
    coupling of the two conditional laws, each evaluated on its own chain's
    past, so both marginal trajectories keep the law of their own chain.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if burn_in < approx.k:
        raise ValueError(f"burn_in must be >= k={approx.k} so the approximation has a past")
    if kernel.alphabet_size != approx.alphabet_size:
        raise ValueError("kernel and approximation alphabets differ")
    rng = seed.generator()
    a = kernel.alphabet_size
    k = approx.k
    tracker = _law_tracker(kernel)
    recent = [0] * k
    for _ in range(burn_in):
        symbol = _inverse_cdf(tracker.law(), float(rng.random()))
        tracker.push(symbol)
        recent.append(symbol)
    y_code = 0
    for symbol in recent[-k:]:
        y_code = y_code * a + symbol
    y_tail = a ** (k - 1)
    x_out = np.empty(n, dtype=np.int64)
    y_out = np.empty(n, dtype=np.int64)
    first = None
    for t in range(n):
        x, y, _ = maximal_coupling_step(tracker.law(), approx.table[y_code], rng)
        x_out[t] = x
        y_out[t] = y
        if first is None and x != y:
            first = t + 1
        tracker.push(x)
        y_code = (y_code % y_tail) * a + y
    return CoupledPair(chain=x_out, approximation=y_out, first_discrepancy=first)


def discrepancy_rate(
    kernel: Kernel,
    k: int,
    r: int,
    replicates: int,
    seed: SeedSpec,
    approx: Optional[OrderKKernel] = None,
    burn_in: Optional[int] = None,
) -> tuple:
    """Monte Carlo estimate of P(any discrepancy within the first r coupled steps).

    Each replicate owns stream ``seed.stream(i)``; outcomes are merged in
    replicate order, so results do not depend on scheduling.  Returns
    ``(estimate, standard_error)``; r = 0 is 0 by convention.
    """
    from .simulate import default_burn_in

    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if r < 0:
        raise ValueError(f"horizon r must be >= 0, got {r}")
    if r == 0:
        return 0.0, 0.0
    if approx is None:
        approx = canonical_from_kernel(kernel, k)
    if burn_in is None:
        burn_in = max(default_burn_in(kernel), k)
    hits = 0
    for i in range(replicates):
        pair = coupled_pair_trajectories(kernel, approx, r, burn_in, seed.stream(i))
        if pair.first_discrepancy is not None:
            hits += 1
    estimate = hits / replicates
    se = float(np.sqrt(estimate * (1.0 - estimate) / replicates))
    return estimate, se


def coupling_discrepancy_profile(
    kernel: Kernel,
    approx: OrderKKernel,
    n_steps: int,
    burn_in: int,
    seed: SeedSpec,
    horizon: int = 0,
) -> dict:
    """Per-step coupling diagnostics along a single chain trajectory.

    At every step the chain's next symbol is drawn from its own conditional
    law.  A companion symbol from the approximation's law given the shared
    realized past is attached through the conditional form of the maximal
    coupling (agree with probability ``min(p[x], q[x]) / p[x]`` given the
    chain drew ``x``, otherwise draw from the normalized positive part of
    ``q - p``); each (chain, companion) pair then disagrees with probability
    equal to the total-variation distance of the two laws, as in
    :func:`maximal_coupling_step`, while the chain's path is measured just
    once.  With ``horizon > 0`` the run is also cut into consecutive windows
    in which a second companion evolves on its own last-k context, giving
    first-discrepancy outcomes over the horizon.

    Returns a dict with keys ``single_rate``, ``single_se``, ``steps``,
    ``window_rate``, ``window_se``, ``windows``.  Standard errors are
    binomial; window (and to a lesser degree step) outcomes along one run are
    weakly dependent, so treat them as approximate.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if burn_in < approx.k:
        raise ValueError(f"burn_in must be >= k={approx.k}")
    if kernel.alphabet_size != approx.alphabet_size:
        raise ValueError("kernel and approximation alphabets differ")
    rng = seed.generator()
    a = kernel.alphabet_size
    k = approx.k
    tracker = _law_tracker(kernel)
    recent = [0] * k
    for _ in range(burn_in):
        symbol = _inverse_cdf(tracker.law(), float(rng.random()))
        tracker.push(symbol)
        recent.append(symbol)
    recent = recent[-k:]
    y_tail = a ** (k - 1)
    table = approx.table

    def pack(symbols) -> int:
        code = 0
        for s in symbols:
            code = code * a + s
        return code

    def companion(p_row, q_row, x: int) -> int:
        """Conditional maximal-coupling draw of a companion given the chain drew x."""
        p_x = float(p_row[x])
        if float(rng.random()) * p_x < min(p_x, float(q_row[x])):
            return x
        residual = np.maximum(q_row - p_row, 0.0)
        total = float(residual.sum())
        if total <= 0.0:  # identical laws up to rounding: agreement
            return x
        return _inverse_cdf(residual / total, float(rng.random()))

    disagreements = 0
    window_hits = 0
    windows = 0
    window_pos = horizon  # forces a fresh fork at the first step
    w_code = 0
    w_diverged = False
    for _ in range(n_steps):
        p = tracker.law()
        x = _inverse_cdf(p, float(rng.random()))
        if companion(p, table[pack(recent)], x) != x:
            disagreements += 1
        if horizon > 0:
            if window_pos == horizon:
                w_code = pack(recent)
                w_diverged = False
                window_pos = 0
            y = companion(p, table[w_code], x)
            if y != x:
                w_diverged = True
            w_code = (w_code % y_tail) * a + y
            window_pos += 1
            if window_pos == horizon:
                windows += 1
                if w_diverged:
                    window_hits += 1
        tracker.push(x)
        recent.append(x)
        recent.pop(0)
    single_rate = disagreements / n_steps
    single_se = float(np.sqrt(single_rate * (1.0 - single_rate) / n_steps))
    if windows > 0:
        window_rate = window_hits / windows
        window_se = float(np.sqrt(window_rate * (1.0 - window_rate) / windows))
    else:
        window_rate, window_se = 0.0, 0.0
    return {
        "single_rate": single_rate,
        "single_se": single_se,
        "steps": n_steps,
        "window_rate": window_rate,
        "window_se": window_se,
        "windows": windows,
    }
