"""Seeded trajectory samplers for the built-in kernel families.

Conventions shared by all samplers and the block machinery downstream:

* positions are 1-based in formulas (X_1 is the first retained symbol);
* arrays are 0-based numpy ``int64`` vectors;
* the pre-history before the burn-in window is the all-zeros sequence, and
  geometric-mixture lags that reach past the start of that window read 0;
* output is a pure function of ``(kernel, n, burn_in, seed)`` — thread count
  and call order never matter.
"""

from __future__ import annotations

import math

import numpy as np

from .chains import FiniteOrderKernel, GeometricMixtureKernel, Kernel
from .rng import SeedSpec

DEFAULT_BURN_IN_FLOOR = 1000


def default_burn_in(kernel: Kernel) -> int:
    """Burn-in long enough to make initialization bias negligible.

    Distance to stationarity decays at rate at least ``exp(-c*t)`` in the
    coupling sense, so ``ceil(40/c)`` pushes the bias below 1e-15; a hard floor
    of 1000 symbols covers finite-order kernels and small mixing exponents.
    """
    from .chains import mixing_exponent

    c = mixing_exponent(kernel)
    if math.isinf(c):
        return DEFAULT_BURN_IN_FLOOR
    return max(int(math.ceil(40.0 / c)), DEFAULT_BURN_IN_FLOOR)


def _sample_finite_order(kernel: FiniteOrderKernel, steps: int, rng: np.random.Generator) -> list:
    a = kernel.alphabet_size
    cum = np.cumsum(kernel.table, axis=1).tolist()
    uniforms = rng.random(steps).tolist()
    tail = a ** (kernel.order - 1)
    out = []
    append = out.append
    last = a - 1
    code = 0  # all-zeros starting context
    for t in range(steps):
        row = cum[code]
        u = uniforms[t]
        b = 0
        while b < last and row[b] < u:
            b += 1
        append(b)
        code = (code % tail) * a + b
    return out


def _sample_geometric_mixture(
    kernel: GeometricMixtureKernel, steps: int, rng: np.random.Generator
) -> list:
    a = kernel.alphabet_size
    cum = np.cumsum(kernel.base, axis=1).tolist()
    # lag first, then a symbol from the base row at that lag
    lags = rng.geometric(1.0 - kernel.theta, size=steps).tolist()
    uniforms = rng.random(steps).tolist()
    out = []
    append = out.append
    last = a - 1
    for t in range(steps):
        j = t - lags[t]
        row = cum[out[j]] if j >= 0 else cum[0]
        u = uniforms[t]
        b = 0
        while b < last and row[b] < u:
            b += 1
        append(b)
    return out


def sample_infinite_order_trajectory(
    kernel: Kernel, n: int, burn_in: int, seed: SeedSpec
) -> np.ndarray:
    """Sample X_1..X_n after discarding ``burn_in`` initial symbols."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    rng = seed.generator()
    steps = burn_in + n
    if isinstance(kernel, FiniteOrderKernel):
        symbols = _sample_finite_order(kernel, steps, rng)
    else:
        symbols = _sample_geometric_mixture(kernel, steps, rng)
    return np.asarray(symbols[burn_in:], dtype=np.int64)


def sample_markov_trajectory(kernel, n: int, seed: SeedSpec) -> np.ndarray:
    """Stationary sample of length n from an order-k Markov kernel.

    The initial k-context is drawn from the stationary distribution over
    contexts, so the output is a stationary sample in law.
    """
    from .markov import OrderKKernel, stationary_distribution

    if not isinstance(kernel, OrderKKernel):
        raise TypeError("sample_markov_trajectory expects an OrderKKernel")
    k = kernel.k
    if n < k:
        raise ValueError(f"n must be >= the kernel order k={k}, got {n}")
    rng = seed.generator()
    a = kernel.alphabet_size
    pi = stationary_distribution(kernel)
    code = int(np.searchsorted(np.cumsum(pi), rng.random(), side="right"))
    code = min(code, a**k - 1)
    context = []
    c = code
    for _ in range(k):  # unpack, newest digit first
        context.append(c % a)
        c //= a
    out = context[::-1]
    cum = np.cumsum(kernel.table, axis=1).tolist()
    uniforms = rng.random(n - k).tolist()
    append = out.append
    tail = a ** (k - 1)
    last = a - 1
    for t in range(n - k):
        row = cum[code]
        u = uniforms[t]
        b = 0
        while b < last and row[b] < u:
            b += 1
        append(b)
        code = (code % tail) * a + b
    return np.asarray(out, dtype=np.int64)
