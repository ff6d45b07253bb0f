"""Deterministic, addressable random streams.

Every random draw in a run comes from a counter-based Philox generator keyed
by (run seed, robot id, tick, purpose). Streams are therefore independent of
robot update order, scheduling and worker count: the same address always
yields the same draws.
"""

from __future__ import annotations

import numpy as np

# Purpose tags keep sampler proposals, sensing noise and initialization on
# disjoint streams even for the same (seed, robot, tick) address.
SAMPLER = 0
NOISE = 1
INIT = 2


def stream(*key: int) -> np.random.Generator:
    """Generator addressed by an integer key tuple, e.g. (seed, robot, tick, purpose)."""
    ss = np.random.SeedSequence(tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
