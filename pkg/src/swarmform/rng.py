"""
xoshiro256** seeded through splitmix64.

A fixed, documented generator so that initial conditions can be reproduced
bit-for-bit by any implementation: the 64-bit seed is expanded into the
four state words with four successive splitmix64 outputs, and doubles are
taken from the top 53 bits of each output.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    def __init__(self, seed: int = 0, *, state: tuple[int, int, int, int] | None = None):
        if state is None:
            if not 0 <= seed <= _MASK:
                raise ValueError("seed must be a 64-bit unsigned integer")
            sm = SplitMix64(seed)
            state = (sm.next(), sm.next(), sm.next(), sm.next())
        if not any(state):
            raise ValueError("xoshiro256** state must not be all zero")
        self.s = [w & _MASK for w in state]

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()
