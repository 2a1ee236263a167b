"""Seeded random streams.

Every sampler takes an explicit integer seed. Streams are Philox
(counter-based) generators keyed by ``(seed, domain tag, *extra)`` through
``numpy.random.SeedSequence``, so stages sampled from one seed never share a
stream. Vectorised draws assign the ``i``-th variate to packed pair index
``i``, which makes outputs independent of any iteration order.
"""
import numpy as np

ADJACENCY = 0x41
MASK = 0x58
OMEGA = 0x4F
LATENT = 0x5A
FIT = 0x46

_U64 = (1 << 64) - 1


def _check_seed(seed):
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return int(seed)


def stream(seed, tag, *extra):
    """Return a fresh generator for ``(seed, tag, *extra)``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=(tag, *map(int, extra)))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *keys):
    """Derive a child integer seed from ``seed`` and a key path."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(map(int, keys)))
    return int(ss.generate_state(1, np.uint64)[0]) & _U64
