"""Seeded random streams.

Every run is driven by a 64-bit master seed. Trial ``t`` of an ensemble gets
its own seed derived from ``(master_seed, t)`` by numpy's ``SeedSequence``
hashing, so an ensemble's results do not depend on the order in which trials
execute.
"""
from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed for trial ``trial`` of an ensemble keyed by ``master_seed``."""
    ss = np.random.SeedSequence(check_seed(master_seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, np.uint64)[0])


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return make_rng(trial_seed(master_seed, trial))


def binomial_sample(count: int, p: float, rng: np.random.Generator) -> int:
    """One exact Binomial(count, p) variate.

    numpy's generator uses inversion when ``count * min(p, 1-p) < 30`` and the
    BTPE rejection sampler otherwise. ``p == 0`` and ``count == 0`` return 0
    without consuming randomness.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return int(rng.binomial(int(count), p))
