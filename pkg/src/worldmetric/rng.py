"""Deterministic test-data generator (xorshift64, shifts 13/7/17).

Bits are emitted most-significant first from each 64-bit state, so a given
``(seed, n)`` pair reproduces the same string on every platform.
"""

from __future__ import annotations

from .worldstate import BitString

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 0x9E3779B97F4A7C15


class XorShift64:
    def __init__(self, seed: int = DEFAULT_SEED):
        seed &= MASK64
        # zero is a fixed point of xorshift
        self.state = seed or DEFAULT_SEED

    def next(self) -> int:
        x = self.state
        x ^= (x << 13) & MASK64
        x ^= x >> 7
        x ^= (x << 17) & MASK64
        self.state = x
        return x

    def bits(self, n: int) -> BitString:
        words = []
        for _ in range((n + 63) // 64):
            words.append(format(self.next(), "064b"))
        return BitString("".join(words)[:n])

    def below(self, bound: int) -> int:
        """Integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        width = max(1, (bound - 1).bit_length())
        while True:
            v = self.next() >> (64 - width)
            if v < bound:
                return v


def generator_bits(n: int, seed: int = DEFAULT_SEED) -> BitString:
    """``n`` bits from a fresh generator seeded with ``seed``."""
    return XorShift64(seed).bits(n)


def stream_seed(index: int, base: int = DEFAULT_SEED) -> int:
    """Distinct, well-mixed seed for the ``index``-th independent stream."""
    return (base + 0x632BE59BD9B4E019 * (index + 1)) & MASK64 or DEFAULT_SEED
