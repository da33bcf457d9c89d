"""Portable random streams.

Every random draw in the package comes from xoshiro256** seeded through
splitmix64, with fixed conversions to floats, normals and permutations, so a
port to another language can reproduce datasets and initializations bit for bit:

* uniform double: ``(u64 >> 11) * 2**-53``
* normal pair: Box-Muller on two uniforms, ``r = sqrt(-2 ln(1 - u1))``,
  ``(r cos 2 pi u2, r sin 2 pi u2)``
* permutation: Fisher-Yates from the top index down, ``j = floor(u * (i + 1))``

Named sub-streams are derived with :func:`derive_seed` (FNV-1a of the tag
mixed through splitmix64).
"""

from __future__ import annotations

import numpy as np

from . import _kernels

_MASK = (1 << 64) - 1
_TWO_M53 = 2.0**-53


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step. Returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _fnv1a(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


def derive_seed(seed: int, *tags) -> int:
    """Deterministically derive an independent 64-bit seed for a named sub-stream."""
    state = int(seed) & _MASK
    for tag in tags:
        _, state = splitmix64(state ^ _fnv1a(str(tag)))
    return state


class Xoshiro256:
    """xoshiro256** generator seeded from one 64-bit integer via splitmix64."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        s = self.seed
        words = []
        for _ in range(4):
            s, out = splitmix64(s)
            words.append(out)
        self.state = np.array(words, dtype=np.uint64)

    def next_u64(self, n: int) -> np.ndarray:
        return _kernels.xoshiro_fill(self.state, int(n))

    def random(self, n: int) -> np.ndarray:
        """n doubles in [0, 1)."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def uniform(self, low: float, high: float, n: int) -> np.ndarray:
        return low + (high - low) * self.random(n)

    def normal(self, n: int) -> np.ndarray:
        pairs = (int(n) + 1) // 2
        u = self.random(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]

    def permutation(self, n: int) -> np.ndarray:
        if n <= 1:
            return np.arange(n, dtype=np.int64)
        return _kernels.fisher_yates(self.random(n - 1))
