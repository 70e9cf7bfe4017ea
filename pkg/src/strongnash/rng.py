"""SplitMix64 stream used for every random draw in the toolkit.

The generator is deliberately tiny so that instances can be regenerated
bit-for-bit by any other implementation from ``(parameters, seed)``:

    state += 0x9E3779B97F4A7C15            (mod 2**64)
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output z ^ (z >> 31)

Derived draws:

* ``integers(lo, hi)``: ``n = hi - lo + 1``; draws ``>= (2**64 // n) * n``
  are rejected, otherwise ``lo + draw % n``.
* ``uniform()``: ``(draw >> 11) * 2**-53`` in ``[0, 1)``.
* ``normal()``: Box-Muller cosine branch on two uniforms,
  ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, index: int) -> int:
    """Child seed for stream ``index`` of a parent ``seed``."""
    return _finalize((seed & MASK64) ^ _finalize(((index + 1) * GOLDEN_GAMMA) & MASK64))


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _finalize(self.state)

    def integers(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        n = hi - lo + 1
        limit = ((1 << 64) // n) * n
        while True:
            draw = self.next_u64()
            if draw < limit:
                return lo + draw % n

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
