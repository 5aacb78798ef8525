"""Uniform block resampling and the normalized bootstrap statistic.

A bootstrap sample concatenates m excursion blocks chosen uniformly and
independently (with replacement) among the first m blocks of the
decomposition.  Block indices are 1-based to match the position conventions
of the block machinery.  The bootstrap return times satisfy
``R*[0] = 1`` and ``R*[l] = R*[l-1] + length of the chosen block``, so that
``R*[m] - 1`` is exactly the concatenated sample length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import math

import numpy as np

from .chains import Observable
from .errors import DegenerateSampleError
from .rng import SeedSpec

STATISTIC_FORM_TOL = 1e-10


def draw_indices(m: int, seed: SeedSpec) -> np.ndarray:
    """m independent uniform draws from {1, ..., m}."""
    if m < 1:
        raise ValueError(f"block count m must be >= 1, got {m}")
    rng = seed.generator()
    return rng.integers(1, m + 1, size=m, dtype=np.int64)


def assemble_sample(blocks: Sequence, indices) -> tuple:
    """Concatenate the chosen blocks; returns (star_sample, star_return_times)."""
    idx = np.asarray(indices, dtype=np.int64)
    m = len(blocks)
    if idx.ndim != 1 or idx.size < 1:
        raise ValueError("indices must be a nonempty vector")
    if np.any(idx < 1) or np.any(idx > m):
        raise ValueError(f"indices must lie in 1..{m}")
    star_sample = np.concatenate([blocks[i - 1] for i in idx])
    lengths = np.array([len(blocks[i - 1]) for i in idx], dtype=np.int64)
    star_return_times = np.concatenate(([1], 1 + np.cumsum(lengths)))
    return star_sample, star_return_times


def segment_mean(sample, f: Observable) -> float:
    """Mean of the observable over a (possibly resampled) symbol segment."""
    values = f.apply(np.asarray(sample, dtype=np.int64))
    if values.size == 0:
        raise ValueError("sample must be nonempty")
    return float(values.mean())


def sigma_star(centered_sums, star_total_length: int) -> float:
    """Conditional standard deviation scale of the bootstrap sum.

    Uses the exact conditional-variance identity: the variance of the sum of
    m uniformly resampled centered block sums equals ``sum(z**2)``, so the
    per-symbol scale is ``sqrt(sum(z**2) / (R*[m] - 1))``.
    """
    if star_total_length < 1:
        raise ValueError("star_total_length must be >= 1")
    z = np.asarray(centered_sums, dtype=np.float64)
    s2 = float(z @ z)
    if s2 <= 0.0:
        raise DegenerateSampleError("sum of squared centered block sums is zero")
    return math.sqrt(s2 / star_total_length)


def normalized_statistic(blocks: Sequence, centered_sums, indices, f: Observable) -> float:
    """Normalized bootstrap mean deviation for one index vector.

    Computes the defining form ``sqrt(R*[m]-1) / sigma* * (mu* - mu_hat)``
    through full sample assembly, and the reduced form
    ``sum(z[i] for chosen i) / sqrt(sum(z**2))``; verifies they agree within
    1e-10 and returns the reduced form.
    """
    z = np.asarray(centered_sums, dtype=np.float64)
    s2 = float(z @ z)
    if s2 <= 0.0:
        raise DegenerateSampleError("sum of squared centered block sums is zero")
    idx = np.asarray(indices, dtype=np.int64)
    star_sample, star_rt = assemble_sample(blocks, idx)
    star_len = int(star_rt[-1]) - 1
    mu_star = segment_mean(star_sample, f)
    mu_hat = segment_mean(np.concatenate(blocks), f)
    scale = sigma_star(z, star_len)
    defining = math.sqrt(star_len) / scale * (mu_star - mu_hat)
    reduced = float(z[idx - 1].sum()) / math.sqrt(s2)
    if abs(defining - reduced) > STATISTIC_FORM_TOL:
        raise RuntimeError(
            f"statistic forms disagree: defining {defining!r} vs reduced {reduced!r}"
        )
    return reduced


@dataclass(frozen=True)
class BootstrapReplicate:
    """One resample: its indices, assembled sample, and summary statistics."""

    indices: np.ndarray
    star_return_times: np.ndarray
    star_sample: np.ndarray
    mu_star: float
    sigma_star: float
    statistic: float


def bootstrap_replicate(blocks: Sequence, centered_sums, f: Observable, seed: SeedSpec) -> BootstrapReplicate:
    """Draw one full bootstrap replicate from its own random stream."""
    idx = draw_indices(len(blocks), seed)
    star_sample, star_rt = assemble_sample(blocks, idx)
    star_len = int(star_rt[-1]) - 1
    return BootstrapReplicate(
        indices=idx,
        star_return_times=star_rt,
        star_sample=star_sample,
        mu_star=segment_mean(star_sample, f),
        sigma_star=sigma_star(centered_sums, star_len),
        statistic=normalized_statistic(blocks, centered_sums, idx, f),
    )


def bootstrap_distribution(
    blocks: Sequence,
    centered_sums,
    B: int,
    seed: SeedSpec,
    f: Observable,
    threads: int = 1,
) -> np.ndarray:
    """B independent normalized statistics, replicate b drawn from stream b.

    Every replicate goes through :func:`normalized_statistic`, so the
    defining-form/reduced-form identity is verified B times.  Results are
    ordered by replicate index; the thread count changes speed only.
    """
    if B < 1:
        raise ValueError(f"replicate count B must be >= 1, got {B}")
    z = np.asarray(centered_sums, dtype=np.float64)
    if float(z @ z) <= 0.0:
        raise DegenerateSampleError("sum of squared centered block sums is zero")

    def one(b: int) -> float:
        return normalized_statistic(blocks, z, draw_indices(len(blocks), seed.stream(b)), f)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(one, range(1, B + 1)))
    else:
        stats = [one(b) for b in range(1, B + 1)]
    return np.asarray(stats, dtype=np.float64)


def write_statistics_csv(path, statistics) -> None:
    """Single-column CSV of statistic values, header ``statistic``."""
    with open(path, "w", newline="") as fh:
        fh.write("statistic\n")
        for value in statistics:
            fh.write(f"{float(value)!r}\n")
