"""Counter-based random streams.

Every random number in the package is a pure function of
``(seed, stream, trial, index)``: the key of a Philox generator is built
from ``(seed, stream, trial)`` and the ``index``-th draw is read off its
counter. Results therefore never depend on how trials are split across
workers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
TRIAL_BITS = 48

# stream tags
EDGES = 1
GHOSTS = 2
AUX = 3


def philox(seed: int, stream: int, trial: int = 0) -> np.random.Generator:
    if not 0 <= trial < (1 << TRIAL_BITS):
        raise ValueError(f"trial index out of range: {trial}")
    if not 0 <= stream < (1 << (64 - TRIAL_BITS)):
        raise ValueError(f"stream tag out of range: {stream}")
    key = np.array([seed & MASK64, (stream << TRIAL_BITS) | trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniforms(seed: int, stream: int, trial: int, size: int) -> np.ndarray:
    """``size`` doubles in [0, 1); entry i depends only on (seed, stream, trial, i)."""
    return philox(seed, stream, trial).random(size)


def derive(seed: int, trial: int) -> int:
    """A 64-bit seed for trial ``trial`` of a run keyed by ``seed``."""
    return int(philox(seed, AUX, trial).integers(0, 1 << 63, dtype=np.int64))
