"""Deterministic per-trial random streams.

One root seed; the stream for trial k mixes k into the seed with a
splitmix64 finalizer so trials are independent, order-free and
bit-reproducible across runs and platforms.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return (x ^ (x >> 31)) & _MASK


def stream_seed(root: int, trial: int) -> int:
    return splitmix64((root & _MASK) ^ splitmix64(trial & _MASK))


def rng_for(root: int, trial: int = 0) -> np.random.Generator:
    return np.random.default_rng(stream_seed(root, trial))
