"""Reproducible parallel randomness built on the counter-based Philox generator.

Every random draw in the package is a pure function of a ``SeedSpec``:
``(master_seed, stream_id)`` select a Philox stream, and the position within
the stream is the Philox counter.  Monte Carlo replicates receive
``stream_id = replicate index``, so results are independent of thread count
and call order.  Nested experiments derive fresh master seeds with
:meth:`SeedSpec.child` so that, for example, trajectory draws and bootstrap
index draws never share a stream.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a fixed 64-bit bijective scramble."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class SeedSpec:
    """Names one reproducible random stream.

    ``master_seed`` identifies the experiment, ``stream_id`` the unit of work
    within it (replicate index, by convention).  Two specs differing in either
    field produce statistically independent Philox streams.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = (self.master_seed & _MASK64) | ((self.stream_id & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def stream(self, stream_id: int) -> "SeedSpec":
        """Same master seed, different unit-of-work stream."""
        return replace(self, stream_id=stream_id)

    def child(self, tag: int) -> "SeedSpec":
        """Derived spec with a scrambled master seed, for nested experiments.

        Distinct tags give distinct (collision-resistant) masters, so a child's
        streams never coincide with the parent's or a sibling's.
        """
        return SeedSpec(mix64((self.master_seed & _MASK64) ^ mix64(tag)), 0)
