"""Named, splittable random streams.

Every stochastic component draws from its own stream, derived from a root
seed plus an integer key path (replication index, primitive role, ...).
Streams with distinct key paths are statistically independent and do not
depend on the order in which they are created, so replications can run in
any order (or in parallel) and still reproduce bit-identical results.
"""

from __future__ import annotations

import numpy as np

# Role indices for the per-replication primitive sequences.
ARRIVAL = 0
SERVICE = 1
PATIENCE = 2
DIFFUSION = 3
REGULATOR = 4


def substream(seed, *key: int) -> np.random.Generator:
    """Return a Generator for the stream identified by ``seed`` and ``key``.

    ``seed`` is either an integer root seed or an existing
    ``np.random.SeedSequence`` whose key path is extended by ``key``.
    The underlying bit generator is Philox (counter based).
    """
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        spawn_key = tuple(seed.spawn_key) + tuple(key)
    else:
        entropy = int(seed)
        spawn_key = tuple(key)
    ss = np.random.SeedSequence(entropy=entropy, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


def replication_seed(seed_root: int, *key: int) -> np.random.SeedSequence:
    """SeedSequence for one execution lane, to be refined further by role."""
    return np.random.SeedSequence(entropy=int(seed_root), spawn_key=tuple(key))
