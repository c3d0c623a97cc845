"""Reproducible, independent random streams keyed by integer paths.

Each stream is a Philox counter-based generator whose key comes from a
``SeedSequence`` built on the master seed and the stream path, so
``RngStream(seed, 3, 7)`` is the same sequence no matter which thread or in
which order it is created.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    path: tuple[int, ...] = ()

    def __init__(self, seed: int, *path: int):
        if not 0 <= int(seed) <= _U64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        if any(int(p) < 0 for p in path):
            raise ValueError("stream indices must be non-negative")
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "path", tuple(int(p) for p in path))

    def child(self, *index: int) -> "RngStream":
        return RngStream(self.seed, *self.path, *index)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))
