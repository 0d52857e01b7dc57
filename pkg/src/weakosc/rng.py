"""Counter-based uniform streams keyed by (seed, trial index, stream number).

Each draw is the SplitMix64 finalizer applied to a counter derived from the
trial index, so any trial's numbers can be produced in isolation and results
do not depend on how trials are chunked or scheduled.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
N_STREAMS = 8


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _key(seed: int) -> np.uint64:
    return mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))


def counter_bits(seed: int, trials, stream: int) -> np.ndarray:
    if not 0 <= stream < N_STREAMS:
        raise ValueError(f"stream must be in [0, {N_STREAMS})")
    t = np.asarray(trials, dtype=np.uint64)
    with np.errstate(over="ignore"):
        counter = t * np.uint64(N_STREAMS) + np.uint64(stream + 1)
        return mix64(_key(seed) + counter * _GOLDEN)


def counter_uniform(seed: int, trials, stream: int) -> np.ndarray:
    """Uniform doubles in [0, 1), one per trial index."""
    bits = counter_bits(seed, trials, stream) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / 9007199254740992.0)
