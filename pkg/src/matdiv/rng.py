"""Reproducible random substreams keyed by a (seed, stream) pair.

A fixed pair reproduces the same draws across runs and platforms.  Parallel
work items must be given distinct stream indices; functions that consume
more than one substream document the contiguous block of stream indices
they occupy so callers can reserve disjoint ranges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value < _U64:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self) -> np.random.Generator:
        """Fresh PCG64 generator owned by this (seed, stream) pair."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def offset(self, k: int) -> "RngStream":
        """The stream shifted by ``k`` indices; used to hand out substreams."""
        return RngStream(self.seed, self.stream + int(k))
