"""
Ray selection from a random bit stream: bits are read in groups of four and
mapped through the ray table's codes; unassigned codes are discarded and the
next group is read.

The physical QRNG is replaced by a seeded numpy bit stream with the same
rejection semantics.
"""

from __future__ import annotations

from typing import Iterable, List, Protocol

import numpy as np

from sicsim.core.yuoh import Ray, rays_by_code

BITS_PER_CODE = 4


class BitSource(Protocol):
    def next_bits(self, n: int) -> List[int]: ...


class SeededBitStream:
    """Uniform independent bits from a numpy Generator, drawn in blocks."""

    def __init__(self, seed_or_rng, block_size: int = 1 << 16):
        self.rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.default_rng(seed_or_rng)
        self.block_size = block_size
        self._buffer = np.empty(0, dtype=np.uint8)
        self._pos = 0
        self.bits_consumed = 0

    def _refill(self):
        self._buffer = self.rng.integers(0, 2, size=self.block_size, dtype=np.uint8)
        self._pos = 0

    def next_bits(self, n: int) -> List[int]:
        out: List[int] = []
        while len(out) < n:
            if self._pos >= len(self._buffer):
                self._refill()
            take = min(n - len(out), len(self._buffer) - self._pos)
            out.extend(int(b) for b in self._buffer[self._pos:self._pos + take])
            self._pos += take
        self.bits_consumed += n
        return out


class FixedBitStream:
    """Replays a given bit sequence, e.g. "1111 1011"; raises once exhausted."""

    def __init__(self, bits: Iterable):
        if isinstance(bits, str):
            bits = [c for c in bits if c in "01"]
        self.bits = [int(b) for b in bits]
        self._pos = 0
        self.bits_consumed = 0

    def next_bits(self, n: int) -> List[int]:
        if self._pos + n > len(self.bits):
            raise EOFError("FixedBitStream exhausted")
        out = self.bits[self._pos:self._pos + n]
        self._pos += n
        self.bits_consumed += n
        return out


def qrng_next_ray(bitstream: BitSource) -> Ray:
    """First valid ray read from the bit stream, MSB first within each group of four."""
    codes = rays_by_code()
    while True:
        b = bitstream.next_bits(BITS_PER_CODE)
        code = (b[0] << 3) | (b[1] << 2) | (b[2] << 1) | b[3]
        ray = codes.get(code)
        if ray is not None:
            return ray
