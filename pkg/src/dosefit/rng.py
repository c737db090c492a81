"""Keyed random-number streams for reproducible, order-independent simulation.

Every unit of randomized work (a simulated trial, a bootstrap resample)
gets its own counter-based Philox stream identified by an integer key
path, e.g. ``(scenario, replication, BOOT, resample)``. Results are
therefore bit-identical no matter how the work is scheduled or
parallelized, and any subset of the work can be reproduced in
isolation.
"""

from __future__ import annotations

import numpy as np

# Key-path tags keep the purpose-specific streams of one replication apart.
DATA = 0
BOOT = 1
EXPERIMENT = 2


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the (seed, *key) path.

    Distinct key paths give statistically independent Philox streams
    (numpy's SeedSequence spawn-key mechanism).
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
