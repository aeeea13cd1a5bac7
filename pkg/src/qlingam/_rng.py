"""Seeded random streams.

All randomness flows through numpy's PCG64 bit generator (O'Neill 2014,
128-bit LCG state with XSL-RR output) wrapped in ``numpy.random.Generator``.
Child streams are derived with ``numpy.random.SeedSequence`` from an integer
key tuple, so a given (master seed, key...) always yields the same stream no
matter which thread or process asks for it.
"""

import numpy as np

SEED_MAX = 2**64 - 1


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def derive_seed(seed, *keys):
    """Deterministic 64-bit child seed for ``(seed, *keys)``; keys are non-negative ints."""
    entropy = [check_seed(seed)] + [int(k) for k in keys]
    words = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(words[0]) | (int(words[1]) << 32)
