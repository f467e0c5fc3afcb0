"""Deterministic random-stream management.

A single 64-bit seed owns a whole run.  Substreams are derived from (seed,
stream_id) through SeedSequence spawn keys, so the same pair always yields the
same sample sequence regardless of thread scheduling or worker count, and new
consumers never perturb existing ones.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


def stream_id_for(name: str) -> int:
    """Stable 64-bit stream id for a named consumer."""
    h = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(h[:8], "little")


@dataclass
class RngStream:
    """A counter-split random stream rooted at a master seed."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(self.stream_id & 0xFFFFFFFF, self.stream_id >> 32),
        )
        self._gen = np.random.default_rng(ss)

    @classmethod
    def named(cls, seed: int, name: str) -> "RngStream":
        return cls(seed, stream_id_for(name))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, offset: int) -> "RngStream":
        """Derived stream; offsets from distinct names never collide in practice."""
        return RngStream(self.seed, (self.stream_id * 0x9E3779B97F4A7C15 + offset)
                         % (1 << 64))

    # convenience passthroughs
    def normal(self, *shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def random(self, size=None):
        return self._gen.random(size)
