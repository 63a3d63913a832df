"""Seeded random streams.

All randomness in the package flows through explicitly seeded Philox
(counter-based) generators. Worker streams for parallel work are derived by
seed-splitting, so ``(seed, worker)`` always maps to the same stream.
"""

from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1


def make_stream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for ``seed`` and an optional spawn key."""
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def split_streams(seed: int, count: int) -> list[np.random.Generator]:
    return [make_stream(seed, worker) for worker in range(count)]
