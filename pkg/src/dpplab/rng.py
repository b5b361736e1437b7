"""Seed streams: every (seed, key...) tuple gets its own independent generator."""

import numpy as np


def stream(seed, *keys):
    """Generator for the stream identified by seed and integer keys."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def derive(seed, *keys):
    """A child seed (64-bit int) for handing to another component."""
    ss = np.random.SeedSequence([int(seed), *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
