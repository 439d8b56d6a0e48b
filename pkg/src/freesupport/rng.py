"""Seeded random streams.

Every stream is a counter-based Philox generator keyed by a master seed and
a tuple of task counters, so ``stream(7, rep, 2)`` is the same sequence on
every platform regardless of the order in which tasks run.
"""

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    entropy = [int(seed)] + [int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else rng)
