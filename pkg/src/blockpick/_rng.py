"""Counter-based seed derivation.

Every random draw in the package is keyed by a tuple of integers (master
seed, sample size, replicate index, stage tag, ...) so that results never
depend on evaluation order or on the number of worker processes.
"""
from __future__ import annotations

import zlib
from typing import Union

import numpy as np

SeedLike = Union[int, tuple, np.random.SeedSequence]


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("seed keys must be non-negative")
        return int(part)
    # stage names are hashed with a stable (non-randomized) checksum
    return zlib.crc32(str(part).encode("utf-8"))


def seed_sequence(seed: SeedLike, *keys) -> np.random.SeedSequence:
    """Derive a child ``SeedSequence`` from ``seed`` and a key path.

    A tuple ``seed`` is shorthand for ``(seed[0], *seed[1:], *keys)``.
    """
    if isinstance(seed, tuple):
        seed, keys = seed[0], seed[1:] + keys
    extra = tuple(_key(k) for k in keys)
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + extra)
    return np.random.SeedSequence(_key(seed), spawn_key=extra)


def generator(seed: SeedLike, *keys) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *keys)))
