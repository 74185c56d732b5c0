"""
Seeded random streams.

Every stochastic routine draws from Philox, numpy's counter-based bit
generator, keyed by a SeedSequence built from the user seed and a path of
non-negative integers (replicate index, repetition, group, ...). A stream
depends only on (seed, path), never on scheduling or thread count.
"""

import numpy as np


def _entropy(seed, path):
    if seed is None:
        raise ValueError("a seed is required")
    parts = [int(seed), *(int(p) for p in path)]
    if any(p < 0 for p in parts):
        raise ValueError(f"seed path must be non-negative, got {parts}")
    return parts


def stream(seed, *path):
    """Return the generator for ``(seed, *path)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_entropy(seed, path))))


def derive_seed(seed, *path):
    """Return a 32-bit child seed for ``(seed, *path)``."""
    state = np.random.SeedSequence(_entropy(seed, path)).generate_state(1, dtype=np.uint32)
    return int(state[0])
