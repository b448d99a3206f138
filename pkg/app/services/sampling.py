# File: app/services/sampling.py

from typing import List

from mpmath import mp, mpf

_MASK = (1 << 64) - 1


class XorShift64:
    """xorshift64 with shifts (13, 7, 17); the same seed gives the same stream everywhere."""

    def __init__(self, seed: int):
        state = seed & _MASK
        # Zero is the generator's only fixed point.
        self.state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= (x << 13) & _MASK
        x ^= x >> 7
        x ^= (x << 17) & _MASK
        self.state = x
        return x

    def uniform(self) -> float:
        """Top 53 bits as a float in [0, 1)."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def uniform_in(self, low, high) -> mpf:
        low, high = mp.mpf(low), mp.mpf(high)
        return low + (high - low) * mp.mpf(self.uniform())


def x_samples(seed: int, count: int, low="0.1", high="10") -> List[mpf]:
    """`count` sample abscissae in (low, high), at the working precision in force."""
    rng = XorShift64(seed)
    return [rng.uniform_in(low, high) for _ in range(count)]
