"""Pinned pseudo-random primitives for cross-platform reproducible splits.

Data splits must be identical across runs, platforms, and reimplementations,
so they cannot depend on numpy's generator internals. The split stream is a
SplitMix64 sequence feeding an in-place Fisher-Yates shuffle; both algorithms
are short enough to pin here exactly.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream (Steele et al.); 64-bit state, 64-bit outputs."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform draw in [0, bound) by modular reduction.

        The modulo bias is below 2**-40 for any bound under 2**24, which is
        negligible for node counts; the simple rule is what keeps the stream
        reproducible across implementations.
        """
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound


def permutation(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates permutation of range(n) driven by a SplitMix64 stream."""
    stream = SplitMix64(seed)
    perm = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = stream.next_below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
