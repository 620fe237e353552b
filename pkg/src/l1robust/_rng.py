"""Counter-based random streams keyed by (seed, stream indices).

Each trial gets its own Philox generator derived from the run seed and the
trial index, so results do not depend on how trials are split across
workers.
"""
import numpy as np


def stream(seed, *keys):
    """Return an independent generator for ``(seed, *keys)``."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))
