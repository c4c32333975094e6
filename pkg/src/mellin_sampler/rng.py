"""Counter-based random streams keyed by ``(seed, tag, index, ...)``.

Each key gets its own Philox stream, so a draw depends only on its key and
never on the order in which other streams were consumed.
"""

import numpy as np

__all__ = ["substream", "derive_seed"]


def _key(seed, tags):
    return [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(t) for t in tags)]


def substream(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_key(seed, tags))))


def derive_seed(seed: int, *tags: int) -> int:
    """A 64-bit child seed for ``(seed, *tags)``."""
    state = np.random.SeedSequence(_key(seed, tags)).generate_state(1, dtype=np.uint64)
    return int(state[0])
