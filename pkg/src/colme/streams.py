"""Deterministic RNG stream derivation.

One master seed fans out to an independent stream per (replica, purpose);
within a stream, draws are consumed in a fixed (round, agent) order.
Replicas therefore reproduce bit-for-bit no matter how they are scheduled
across workers.
"""

from __future__ import annotations

import numpy as np

PURPOSES = ("data", "dp-noise", "graph", "assignment")

# Replica index used to derive the pinned (shared) topology streams.
PINNED_REPLICA = 0


def substream(master_seed: int, replica: int, purpose: str) -> np.random.Generator:
    """Generator for one (replica, purpose) lane of the master seed."""
    idx = PURPOSES.index(purpose)
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(replica, idx))
    return np.random.default_rng(ss)
