"""SplitMix64 streams, scalar and vectorised.

Every coded symbol owns a stream seeded from ``base_seed`` and its ESI, so a
symbol's neighbours can be rebuilt anywhere without shared RNG state. The
state advances by a fixed increment, which means draw ``j`` of a stream is
``finalize(state0 + (j + 1) * GOLDEN)`` and whole batches of streams can be
evaluated with numpy ``uint64`` arithmetic.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


def finalize(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(*parts: int) -> int:
    """Fold several integers into one 64-bit seed."""
    h = 0
    for part in parts:
        h = finalize(h ^ ((part * GOLDEN) & MASK64) ^ (part >> 64))
    return h


def symbol_state(base_seed: int, esi: int) -> int:
    return finalize((base_seed ^ (esi * GOLDEN)) & MASK64)


class SplitMix64:
    """Sequential SplitMix64 stream."""

    def __init__(self, state: int) -> None:
        self.state = state & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return finalize(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def below(self, n: int) -> int:
        """Integer in ``[0, n)`` by scaling a 53-bit uniform."""
        return int(self.uniform() * n)


def finalize_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def symbol_states(base_seed: int, esis: np.ndarray) -> np.ndarray:
    esis = np.asarray(esis, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return finalize_array(np.uint64(base_seed & MASK64) ^ (esis * np.uint64(GOLDEN)))


def draw_u64(states: np.ndarray, j: int) -> np.ndarray:
    """Draw number ``j`` (0-based) of each stream in ``states``."""
    step = np.uint64(((j + 1) * GOLDEN) & MASK64)
    return finalize_array(states + step)


def draw_uniform(states: np.ndarray, j: int) -> np.ndarray:
    return (draw_u64(states, j) >> np.uint64(11)).astype(np.float64) * _INV_2_53
