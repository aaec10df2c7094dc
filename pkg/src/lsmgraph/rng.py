"""Reproducible random streams.

Every sampler in this package draws from a counter-based Philox generator,
so a fixed integer seed yields the same results on any platform. One seed
drives one experiment; replicate-level streams are derived from
``(seed, replicate_index)`` through ``numpy.random.SeedSequence`` spawn
keys, which makes replicates statistically independent and individually
reproducible (replicate 17 can be re-run without re-running 0..16).
"""

from __future__ import annotations

import numpy as np

RandomState = int | np.random.Generator


def experiment_rng(seed: int) -> np.random.Generator:
    """Philox generator for a whole experiment."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream for replicate `index` of experiment `seed`."""
    if index < 0:
        raise ValueError("replicate index must be nonnegative")
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,)))
    )


def as_rng(seed: RandomState) -> np.random.Generator:
    """Accept either an integer seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return experiment_rng(int(seed))
