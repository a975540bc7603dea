"""Seeded random source.

Every stochastic step draws from an :class:`RngHandle`. Handles are backed by
numpy's Philox counter-based bit generator, and named child streams are
derived from the parent seed, so each pipeline stage gets the same draws
whether it runs alone or as part of a full run.
"""
import zlib

import numpy as np

from .errors import DataError

ALGORITHM = "philox4x64-10"


class RngHandle:
    def __init__(self, seed, _spawn_key=()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.algorithm = ALGORITHM
        self._spawn_key = tuple(_spawn_key)
        seq = np.random.SeedSequence(entropy=seed, spawn_key=self._spawn_key)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def child(self, name):
        """Independent stream keyed by ``name``; does not consume parent draws."""
        key = zlib.crc32(str(name).encode("utf-8"))
        return RngHandle(self.seed, self._spawn_key + (key,))

    def permutation(self, n):
        return self.generator.permutation(n)

    def uniform(self, low, high, size):
        return self.generator.uniform(low, high, size=size)

    def __repr__(self):
        return f"RngHandle(seed={self.seed}, key={self._spawn_key})"


def standard_normal(rng, rows, cols):
    return rng.generator.standard_normal((rows, cols))


def uniform_split(rng, n, fraction):
    """Random disjoint partition of ``range(n)``.

    The first set has ``round(fraction * n)`` members (half rounds up),
    clamped so neither side is empty. Both index arrays are sorted.
    """
    if n < 2:
        raise DataError(f"cannot split {n} item(s); need at least 2")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    k = int(np.floor(fraction * n + 0.5))
    k = min(max(k, 1), n - 1)
    perm = rng.permutation(n)
    return np.sort(perm[:k]), np.sort(perm[k:])
