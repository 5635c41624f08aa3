"""Counter-based random substreams.

Every stochastic routine in the package derives its randomness from
``substream(seed, index)``: a Philox generator keyed by the pair. Streams for
distinct indices are statistically independent and depend only on the pair,
never on execution order, so sharded work merged in index order reproduces a
serial run bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for substream `index` of the stream family `seed`."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
