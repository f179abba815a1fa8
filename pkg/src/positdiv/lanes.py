"""Fixed-width two's-complement words vectorized over numpy lanes.

A ``Words`` value holds one W-bit register per lane. Registers up to 64 bits
live in a single ``uint64`` limb; wider ones (up to 119 bits) are split into a
high limb holding the top bits and a low limb holding the rest, so the bits
that selection logic inspects are always in ``hi``.

All arithmetic is modulo 2**W, which is exactly how a hardware register of
that width behaves.
"""

from __future__ import annotations

import numpy as np

U64 = np.uint64
MAX_WIDTH = 119


def umask(bits: int) -> np.uint64:
    """All-ones mask of ``bits`` bits as a numpy scalar (0 <= bits <= 64)."""
    return U64((1 << bits) - 1)


def as_u64(values) -> np.ndarray:
    """Coerce ints or an integer array to a ``uint64`` array (two's complement wrap)."""
    arr = np.asarray(values)
    if arr.dtype == np.uint64:
        return arr
    if arr.dtype == object:
        return np.array([int(v) & 0xFFFF_FFFF_FFFF_FFFF for v in arr.ravel()], dtype=U64).reshape(arr.shape)
    return arr.astype(np.int64).view(U64) if arr.dtype.kind == "i" else arr.astype(U64)


def bit_length(x: np.ndarray) -> np.ndarray:
    """Per-lane ``int.bit_length`` of a uint64 array, returned as int64."""
    x = np.asarray(x, dtype=U64)
    out = np.zeros(x.shape, dtype=np.int64)
    for s in (32, 16, 8, 4, 2, 1):
        big = x >= U64(1 << s)
        out += np.where(big, s, 0)
        x = np.where(big, x >> U64(s), x)
    return out + x.astype(np.int64)


class WordFormat:
    """Width and limb split of a lane register."""

    __slots__ = ("width", "lo_bits", "hi_bits", "lo_mask", "hi_mask")

    def __init__(self, width: int):
        if not 2 <= width <= MAX_WIDTH:
            raise ValueError(f"register width {width} outside [2, {MAX_WIDTH}]")
        self.width = width
        self.lo_bits = 0 if width <= 64 else width - 56
        self.hi_bits = width - self.lo_bits
        self.lo_mask = umask(self.lo_bits)
        self.hi_mask = umask(self.hi_bits)

    def __eq__(self, other):
        return isinstance(other, WordFormat) and other.width == self.width

    def __hash__(self):
        return hash(self.width)

    def __repr__(self):
        return f"WordFormat({self.width})"

    def zeros(self, size: int) -> Words:
        lo = np.zeros(size, dtype=U64) if self.lo_bits else None
        return Words(self, np.zeros(size, dtype=U64), lo)

    def from_ints(self, values) -> Words:
        """Build from Python ints (any sign; reduced modulo 2**W)."""
        vals = [int(v) % (1 << self.width) for v in values]
        lb = self.lo_bits
        hi = np.array([v >> lb for v in vals], dtype=U64)
        lo = np.array([v & ((1 << lb) - 1) for v in vals], dtype=U64) if lb else None
        return Words(self, hi, lo)

    def from_u64(self, arr, shift: int = 0) -> Words:
        """Place a uint64 array into the register, then shift it left by ``shift``."""
        arr = as_u64(arr)
        if self.lo_bits:
            w = Words(self, (arr >> U64(self.lo_bits)) & self.hi_mask, arr & self.lo_mask)
        else:
            w = Words(self, arr & self.hi_mask, None)
        return w.shl(shift) if shift else w


class Words:
    """A W-bit register per lane."""

    __slots__ = ("fmt", "hi", "lo")

    def __init__(self, fmt: WordFormat, hi: np.ndarray, lo: np.ndarray | None):
        self.fmt = fmt
        self.hi = hi
        self.lo = lo

    def __len__(self):
        return len(self.hi)

    def _mk(self, hi, lo):
        return Words(self.fmt, hi, lo)

    def __xor__(self, o: Words) -> Words:
        return self._mk(self.hi ^ o.hi, None if self.lo is None else self.lo ^ o.lo)

    def __and__(self, o: Words) -> Words:
        return self._mk(self.hi & o.hi, None if self.lo is None else self.lo & o.lo)

    def __or__(self, o: Words) -> Words:
        return self._mk(self.hi | o.hi, None if self.lo is None else self.lo | o.lo)

    def __invert__(self) -> Words:
        f = self.fmt
        return self._mk(~self.hi & f.hi_mask, None if self.lo is None else ~self.lo & f.lo_mask)

    def __add__(self, o: Words) -> Words:
        f = self.fmt
        if self.lo is None:
            return self._mk((self.hi + o.hi) & f.hi_mask, None)
        lo = self.lo + o.lo
        carry = lo >> U64(f.lo_bits)
        return self._mk((self.hi + o.hi + carry) & f.hi_mask, lo & f.lo_mask)

    def add_bit(self, bit: np.ndarray) -> Words:
        """Add a 0/1 lane array at the LSB (carry-in)."""
        bit = np.asarray(bit, dtype=U64)
        f = self.fmt
        if self.lo is None:
            return self._mk((self.hi + bit) & f.hi_mask, None)
        lo = self.lo + bit
        carry = lo >> U64(f.lo_bits)
        return self._mk((self.hi + carry) & f.hi_mask, lo & f.lo_mask)

    def neg(self) -> Words:
        return (~self).add_bit(np.ones(len(self), dtype=U64))

    def shl(self, s: int) -> Words:
        f = self.fmt
        if s == 0:
            return self._mk(self.hi.copy(), None if self.lo is None else self.lo.copy())
        if s >= f.width:
            return f.zeros(len(self))
        if self.lo is None:
            return self._mk((self.hi << U64(s)) & f.hi_mask, None)
        lb = f.lo_bits
        if s < lb:
            hi = ((self.hi << U64(s)) | (self.lo >> U64(lb - s))) & f.hi_mask
            return self._mk(hi, (self.lo << U64(s)) & f.lo_mask)
        hi = self.lo << U64(s - lb)
        if s < 64:
            hi = hi | (self.hi << U64(s))
        return self._mk(hi & f.hi_mask, np.zeros_like(self.lo))

    def top(self, nbits: int) -> np.ndarray:
        """The ``nbits`` most significant bits as an unsigned uint64 array."""
        hb = self.fmt.hi_bits
        if nbits > hb:
            raise ValueError(f"cannot take {nbits} top bits from a {hb}-bit high limb")
        return self.hi >> U64(hb - nbits)

    def msb(self) -> np.ndarray:
        return (self.hi >> U64(self.fmt.hi_bits - 1)).astype(bool)

    def is_zero(self) -> np.ndarray:
        z = self.hi == 0
        return z if self.lo is None else z & (self.lo == 0)

    def le(self, o: Words) -> np.ndarray:
        """Unsigned ``self <= o`` per lane."""
        if self.lo is None:
            return self.hi <= o.hi
        return (self.hi < o.hi) | ((self.hi == o.hi) & (self.lo <= o.lo))

    def abs(self) -> Words:
        neg = self.msb()
        return Words.select(neg, self.neg(), self)

    def div_small(self, c: int) -> Words:
        """Unsigned floor division by a small positive constant."""
        cc = U64(c)
        if self.lo is None:
            return self._mk(self.hi // cc, None)
        rem = self.hi % cc
        lo = ((rem << U64(self.fmt.lo_bits)) | self.lo) // cc
        return self._mk(self.hi // cc, lo)

    def take(self, idx) -> Words:
        return self._mk(self.hi[idx], None if self.lo is None else self.lo[idx])

    @staticmethod
    def select(mask: np.ndarray, a: Words, b: Words) -> Words:
        lo = None if a.lo is None else np.where(mask, a.lo, b.lo)
        return Words(a.fmt, np.where(mask, a.hi, b.hi), lo)

    def to_ints(self) -> list[int]:
        """Unsigned register contents as Python ints."""
        lb = self.fmt.lo_bits
        if self.lo is None:
            return [int(h) for h in self.hi]
        return [(int(h) << lb) | int(l) for h, l in zip(self.hi, self.lo)]

    def to_signed(self) -> list[int]:
        w = self.fmt.width
        return [v - (1 << w) if v >> (w - 1) else v for v in self.to_ints()]
