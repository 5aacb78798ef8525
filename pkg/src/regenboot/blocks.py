"""Return times of the initial string and the excursion blocks between them.

Positions are 1-based throughout: the first retained symbol is X_1, the
zeroth return time is 1, and the i-th return time is the smallest later
position at which the trajectory's own initial k-string reoccurs.
Overlapping occurrences count, so blocks can be shorter than k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .chains import Observable
from .errors import DegenerateSampleError, InsufficientReturnsError


def return_times(trajectory, k: int, m: int) -> np.ndarray:
    """First m+1 return times (1-based, R[0] = 1) of the initial k-string.

    Requires the m-th occurrence to fit entirely inside the trajectory; raises
    :class:`InsufficientReturnsError` otherwise so the caller can extend the
    sample.
    """
    traj = np.asarray(trajectory, dtype=np.int64)
    if k < 1:
        raise ValueError(f"string length k must be >= 1, got {k}")
    if m < 1:
        raise ValueError(f"block count m must be >= 1, got {m}")
    n = traj.size
    if n < k:
        raise InsufficientReturnsError(found=0, requested=m)
    pattern = traj[:k]
    match = np.ones(n - k + 1, dtype=bool)
    for i in range(k):
        match &= traj[i : n - k + 1 + i] == pattern[i]
    occurrences = np.flatnonzero(match)  # 0-based; occurrences[0] == 0 always
    if occurrences.size < m + 1:
        raise InsufficientReturnsError(found=int(occurrences.size) - 1, requested=m)
    return occurrences[: m + 1] + 1


def extract_blocks(trajectory, return_times: Sequence[int]) -> list:
    """Excursion blocks: block i spans positions R[i-1] .. R[i]-1 (1-based, inclusive)."""
    traj = np.asarray(trajectory, dtype=np.int64)
    rt = np.asarray(return_times, dtype=np.int64)
    if rt.size < 2 or rt[0] != 1 or np.any(np.diff(rt) < 1):
        raise ValueError("return times must start at 1 and be strictly increasing")
    if rt[-1] - 1 > traj.size:
        raise ValueError("return times exceed the trajectory length")
    return [traj[rt[i] - 1 : rt[i + 1] - 1] for i in range(rt.size - 1)]


@dataclass(frozen=True)
class RegenerationDecomposition:
    """A trajectory cut at the return times of its own initial k-string."""

    k: int
    return_times: np.ndarray
    blocks: list
    lengths: np.ndarray

    @classmethod
    def from_trajectory(cls, trajectory, k: int, m: int) -> "RegenerationDecomposition":
        rt = return_times(trajectory, k, m)
        blocks = extract_blocks(trajectory, rt)
        return cls(k=k, return_times=rt, blocks=blocks, lengths=np.diff(rt))


@dataclass(frozen=True)
class BlockStats:
    """Per-block observable sums and the segment mean they are centered on.

    ``centered_sums[i]`` is the block-i sum of ``f - segment_mean``; these sum
    to zero by construction.  ``true_centered_sums`` centers on a supplied
    exact mean instead and is None when no mean was given.
    """

    segment_mean: float
    centered_sums: np.ndarray
    lengths: np.ndarray
    true_centered_sums: Optional[np.ndarray] = None

    @property
    def sum_of_squares(self) -> float:
        return float(self.centered_sums @ self.centered_sums)


def block_statistics(blocks: Sequence, f: Observable, mu: Optional[float] = None) -> BlockStats:
    """Segment mean and per-block centered sums of the observable.

    The segment mean is the mean of f over the concatenation of the blocks,
    i.e. over X_1 .. X_{R_m - 1}.  When ``mu`` is supplied the sums centered
    at that value are computed as well.
    """
    if len(blocks) == 0:
        raise ValueError("need at least one block")
    lengths = np.array([len(b) for b in blocks], dtype=np.int64)
    if np.any(lengths < 1):
        raise ValueError("blocks must be nonempty")
    values = f.apply(np.concatenate(blocks))
    mean = float(values.mean())
    offsets = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    sums = np.add.reduceat(values, offsets)
    centered = sums - mean * lengths
    true_centered = None if mu is None else sums - float(mu) * lengths
    return BlockStats(
        segment_mean=mean,
        centered_sums=centered,
        lengths=lengths,
        true_centered_sums=true_centered,
    )


def regeneration_diagnostics(
    centered_sums, true_centered_sums=None
) -> tuple:
    """Convergence diagnostics of a block decomposition.

    Returns ``(lindeberg_ratio, centering_ratio)``:

    * ``lindeberg_ratio`` — ``sum(z**4) / sum(z**2)**2`` over the centered
      sums; it lies in (0, 1], equals 1/m for equal-magnitude blocks, and its
      decay is what drives asymptotic normality of the bootstrap statistic.
    * ``centering_ratio`` — ``sum(z**2) / sum(z_true**2)``, the effect of
      centering at the segment mean instead of the exact mean; None when no
      exact-mean sums were given.
    """
    z = np.asarray(centered_sums, dtype=np.float64)
    s2 = float(z @ z)
    if s2 <= 0.0:
        raise DegenerateSampleError(
            "all blocks carry the same observable sum; diagnostics are undefined"
        )
    lindeberg = float((z**2) @ (z**2)) / (s2 * s2)
    centering = None
    if true_centered_sums is not None:
        zt = np.asarray(true_centered_sums, dtype=np.float64)
        st2 = float(zt @ zt)
        if st2 <= 0.0:
            raise DegenerateSampleError("exact-mean centered sums are all zero")
        centering = s2 / st2
    return lindeberg, centering


def write_decomposition_csv(path, decomposition: RegenerationDecomposition, stats: BlockStats) -> None:
    """One row per block: index, start position, length, centered sum."""
    rt = decomposition.return_times
    with open(path, "w", newline="") as fh:
        fh.write("index,start,length,centered_sum\n")
        for i in range(len(decomposition.blocks)):
            fh.write(
                f"{i + 1},{int(rt[i])},{int(decomposition.lengths[i])},"
                f"{float(stats.centered_sums[i])!r}\n"
            )
