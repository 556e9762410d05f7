"""Portable, seedable random number generation.

Dataset builds must reproduce bit-for-bit across platforms, languages and
worker counts, so this module implements a fixed, named generator instead
of deferring to ``random`` or numpy: xoshiro256** (Blackman & Vigna),
seeded through splitmix64. Streams are keyed by ``(global seed, stream id)``
so every query record owns an independent generator and parallel builds
stay order-independent.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (output, next state)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64, state


class Xoshiro256StarStar:
    """xoshiro256** generator with splitmix64 seeding.

    ``random()`` maps the top 53 bits of the 64-bit output onto [0, 1),
    the reference floating-point conversion for this generator family.
    """

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int) -> None:
        state = seed & _MASK64
        outs = []
        for _ in range(4):
            out, state = splitmix64(state)
            outs.append(out)
        if not any(outs):  # all-zero state is the one forbidden state
            outs[0] = 1
        self._s0, self._s1, self._s2, self._s3 = outs

    @classmethod
    def for_stream(cls, seed: int, stream_id: str) -> "Xoshiro256StarStar":
        """Independent stream keyed by (seed, stream_id)."""
        return cls((seed ^ fnv1a64(stream_id.encode("utf-8"))) & _MASK64)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s1 * 5) & _MASK64
        result = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53
