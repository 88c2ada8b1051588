"""Seed handling.

All randomness flows from one 64-bit seed.  Work units (a chunk of trials,
an input pair, ...) get their own stream keyed by ``(seed, *key)`` so that a
result never depends on the order in which units are executed.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise InvalidArgumentError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for work unit ``key`` under ``seed``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
