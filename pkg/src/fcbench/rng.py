"""Pinned 64-bit random number generator for reproducible pair sampling.

Benchmark runs must be bit-reproducible across machines, languages and
worker counts, so sampling is built on two fully specified primitives
instead of a platform RNG:

* ``fnv1a64`` -- FNV-1a hash of the video id, so every video gets its own
  stream regardless of scheduling order.
* ``splitmix64`` -- the stream generator. The per-video stream seed is
  ``splitmix64_mix(seed ^ fnv1a64(video_id))`` and successive outputs are
  produced by stepping a splitmix64 state from that seed.

Both algorithms are public domain and trivial to re-implement in any
language, which is what makes cross-runtime golden fixtures possible.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x00000100000001B3

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def fnv1a64(text: str) -> int:
    """FNV-1a hash of ``text`` (UTF-8 bytes), reduced mod 2**64."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return h


def splitmix64_mix(x: int) -> int:
    """The splitmix64 output function applied to a single 64-bit value."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64 stream: state advances by the golden gamma each draw."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Draw modulo ``bound``; bound must be positive."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound


def stream_seed(seed: int, video_id: str) -> int:
    """Per-video stream seed: splitmix64_mix(seed XOR fnv1a64(video_id))."""
    return splitmix64_mix((seed & MASK64) ^ fnv1a64(video_id))


def video_stream(seed: int, video_id: str) -> SplitMix64:
    """The sampling stream for one video under one run seed."""
    return SplitMix64(stream_seed(seed, video_id))
