"""Posit<n, 2> encoding and decoding.

Bit patterns are handled as unsigned n-bit integers, MSB first. Negative
posits are stored in two's complement; decoding negates them first so that
the fields (and the significand) are always those of the magnitude.

The array functions (``decode_array``, ``encode_round_array``) are the
workhorses used by the divider; the scalar functions wrap them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lanes import U64, as_u64, bit_length, umask

ES = 2
MIN_WIDTH = 4
MAX_WIDTH = 64


class PositClass(enum.Enum):
    ZERO = "zero"
    NAR = "nar"
    NORMAL = "normal"


def _check_width(n: int) -> None:
    if not MIN_WIDTH <= n <= MAX_WIDTH:
        raise ValueError(f"posit width must be in [{MIN_WIDTH}, {MAX_WIDTH}], got {n}")


@dataclass(frozen=True)
class PositWord:
    """A raw n-bit posit pattern."""

    bits: int
    width: int

    def __post_init__(self):
        _check_width(self.width)
        if not 0 <= self.bits < (1 << self.width):
            raise ValueError(f"pattern {self.bits:#x} does not fit in {self.width} bits")

    @property
    def cls(self) -> PositClass:
        if self.bits == 0:
            return PositClass.ZERO
        if self.bits == 1 << (self.width - 1):
            return PositClass.NAR
        return PositClass.NORMAL

    @property
    def signed(self) -> int:
        """The pattern read as a two's-complement integer (posit ordering key)."""
        return self.bits - (1 << self.width) if self.bits >> (self.width - 1) else self.bits

    def binary(self) -> str:
        return format(self.bits, f"0{self.width}b")

    def hex(self) -> str:
        return f"0x{self.bits:0{(self.width + 3) // 4}x}"

    def __str__(self):
        return self.binary()

    @classmethod
    def parse(cls, text: str, width: int) -> PositWord:
        """Parse a binary string, ``0x`` hex, ``0b`` binary, or a decimal integer."""
        return cls(parse_pattern(text, width), width)

    @classmethod
    def zero(cls, width: int) -> PositWord:
        return cls(0, width)

    @classmethod
    def nar(cls, width: int) -> PositWord:
        return cls(1 << (width - 1), width)

    @classmethod
    def one(cls, width: int) -> PositWord:
        return cls(1 << (width - 2), width)

    @classmethod
    def maxpos(cls, width: int) -> PositWord:
        return cls((1 << (width - 1)) - 1, width)

    @classmethod
    def minpos(cls, width: int) -> PositWord:
        return cls(1, width)


class PatternError(ValueError):
    """Raised for operand strings that do not parse at the requested width."""


def parse_pattern(text: str, width: int) -> int:
    s = text.strip().replace("_", "")
    if not s:
        raise PatternError("empty pattern")
    low = s.lower()
    skip = 2 if low.startswith(("0x", "0b")) else 0
    if low.startswith("0x"):
        digits, base, alphabet = low[2:], 16, "0123456789abcdef"
    elif low.startswith("0b"):
        digits, base, alphabet = low[2:], 2, "01"
    elif len(s) == width and set(s) <= {"0", "1"}:
        digits, base, alphabet = s, 2, "01"
    elif set(s) <= {"0", "1"} and len(s) > 1 and s.startswith("0"):
        # a zero-led bit string of the wrong length is a width mismatch
        digits, base, alphabet = s, 2, "01"
    else:
        digits, base, alphabet = low, 10, "0123456789"
    for pos, ch in enumerate(digits):
        if ch not in alphabet:
            raise PatternError(f"invalid character {ch!r} at position {pos + skip} of {text!r}")
    if not digits:
        raise PatternError(f"no digits in {text!r}")
    if base == 2 and len(digits) != width:
        raise PatternError(f"binary pattern {text!r} has {len(digits)} bits, expected {width}")
    value = int(digits, base)
    if value >= 1 << width:
        raise PatternError(f"{text!r} does not fit in {width} bits")
    return value


@dataclass(frozen=True)
class DecodedPosit:
    """Fields of a posit magnitude plus its sign.

    ``fraction`` holds the ``frac_bits`` fraction bits actually present in the
    pattern. Exponent bits cut off by a long regime read as zero.
    """

    cls: PositClass
    width: int
    sign: int = 0
    regime: int = 0
    exponent: int = 0
    fraction: int = 0
    frac_bits: int = 0

    @property
    def scale(self) -> int:
        return 4 * self.regime + self.exponent

    @property
    def significand_bits(self) -> int:
        """1.f as an integer with ``width - 5`` fractional bits (zero padded)."""
        fb = max(self.width - 5, 0)
        return (1 << fb) | (self.fraction << (fb - self.frac_bits))

    @property
    def significand(self) -> Fraction:
        return Fraction(self.significand_bits, 1 << max(self.width - 5, 0))

    def value(self) -> Fraction:
        if self.cls is not PositClass.NORMAL:
            raise ValueError(f"{self.cls.value} has no real value")
        v = self.significand * Fraction(2) ** self.scale
        return -v if self.sign else v


@dataclass
class DecodedArray:
    """Vectorized decode result; ``frac`` is zero-padded to ``width - 5`` bits."""

    width: int
    zero: np.ndarray
    nar: np.ndarray
    sign: np.ndarray
    k: np.ndarray
    e: np.ndarray
    frac: np.ndarray
    frac_present: np.ndarray

    @property
    def scale(self) -> np.ndarray:
        return 4 * self.k + self.e


def decode_array(bits, n: int) -> DecodedArray:
    """Decode an array of n-bit patterns. Special lanes get k=e=frac=0."""
    _check_width(n)
    bits = as_u64(bits) & umask(n)
    zero = bits == 0
    nar = bits == U64(1 << (n - 1))
    sign = (bits >> U64(n - 1)).astype(bool) & ~nar
    mag = np.where(sign, (~bits + U64(1)) & umask(n), bits)
    field = mag & umask(n - 1)
    r0 = (field >> U64(n - 2)).astype(bool)
    run = (n - 1) - np.where(r0, bit_length(~field & umask(n - 1)), bit_length(field))
    k = np.where(r0, run - 1, -run)
    rl = np.minimum(run + 1, n - 1)
    tail = (field << rl.astype(U64)) & umask(n - 1)
    e = (tail >> U64(n - 3)).astype(np.int64)
    frac = (tail & umask(n - 3)) >> U64(2)
    special = zero | nar
    return DecodedArray(
        width=n,
        zero=zero,
        nar=nar,
        sign=sign,
        k=np.where(special, 0, k),
        e=np.where(special, 0, e),
        frac=np.where(special, U64(0), frac),
        frac_present=np.where(special, 0, np.maximum(n - 3 - rl, 0)),
    )


def decode(word: PositWord) -> DecodedPosit:
    n = word.width
    cls = word.cls
    if cls is not PositClass.NORMAL:
        return DecodedPosit(cls, n)
    d = decode_array(np.array([word.bits], dtype=U64), n)
    fb = max(n - 5, 0)
    present = int(d.frac_present[0])
    return DecodedPosit(
        cls=cls,
        width=n,
        sign=int(d.sign[0]),
        regime=int(d.k[0]),
        exponent=int(d.e[0]),
        fraction=int(d.frac[0]) >> (fb - present),
        frac_bits=present,
    )


def _shl(x: np.ndarray, s) -> np.ndarray:
    return x << np.asarray(s).astype(U64)


def _shr(x: np.ndarray, s) -> np.ndarray:
    return x >> np.asarray(s).astype(U64)


def encode_round_array(sign, k, e, frac, frac_bits: int, sticky, n: int) -> np.ndarray:
    """Assemble and round n-bit posits from normalized fields.

    The value encoded is (-1)^sign * 2^(4k+e) * (1 + frac / 2^frac_bits), plus
    an infinitesimal when ``sticky`` is set. The fraction is shifted right as
    far as the regime requires; the first dropped bit is the round bit and
    the rest fold into sticky. Rounding is to nearest, ties to even pattern.
    Magnitudes beyond maxpos / below minpos saturate.
    """
    _check_width(n)
    if frac_bits + 2 > 64:
        raise ValueError("fraction wider than 62 bits")
    k = np.asarray(k, dtype=np.int64)
    e = as_u64(e)
    frac = as_u64(frac)
    sticky = np.asarray(sticky, dtype=bool)
    over = k >= n - 2
    under = k < -(n - 2)
    kc = np.clip(k, -(n - 2), n - 3)
    rl = np.where(kc >= 0, kc + 2, 1 - kc)
    regime = np.where(kc >= 0, _shl(_shl(U64(1), np.maximum(kc + 1, 0)) - U64(1), 1), U64(1))
    avail = (n - 1) - rl
    tb = frac_bits + 2
    tail = (e << U64(frac_bits)) | frac
    room = avail >= tb
    sh = np.where(room, 1, tb - avail)
    kept = np.where(room, _shl(tail, np.maximum(avail - tb, 0)), _shr(tail, sh))
    rbit = np.where(room, U64(0), _shr(tail, sh - 1) & U64(1)).astype(bool)
    low = tail & (_shl(U64(1), sh - 1) - U64(1))
    stick = sticky | (~room & (low != 0))
    pattern = _shl(regime, avail) | kept
    pattern = pattern + (rbit & (stick | (pattern & U64(1)).astype(bool))).astype(U64)
    pattern = np.where(over, umask(n - 1), np.where(under, U64(1), pattern))
    neg = np.asarray(sign, dtype=bool)
    return np.where(neg, (~pattern + U64(1)) & umask(n), pattern)


def encode_round(sign: int, k: int, e: int, fraction: int, frac_bits: int, sticky: int, width: int) -> PositWord:
    """Scalar form of :func:`encode_round_array`."""
    if not 0 <= e < 4:
        raise ValueError(f"exponent {e} outside [0, 4)")
    if fraction < 0 or fraction >> frac_bits:
        raise ValueError(f"fraction {fraction} does not fit in {frac_bits} bits")
    out = encode_round_array(
        np.array([bool(sign)]),
        np.array([k]),
        np.array([e], dtype=U64),
        np.array([fraction], dtype=U64),
        frac_bits,
        np.array([bool(sticky)]),
        width,
    )
    return PositWord(int(out[0]), width)


def encode(p: DecodedPosit) -> PositWord:
    """Exact re-encoding of decoded fields (no rounding takes place)."""
    if p.cls is PositClass.ZERO:
        return PositWord.zero(p.width)
    if p.cls is PositClass.NAR:
        return PositWord.nar(p.width)
    return encode_round(p.sign, p.regime, p.exponent, p.fraction, p.frac_bits, 0, p.width)


def value_of(word: PositWord) -> Fraction | None:
    """Real value of a pattern; ``None`` for NaR."""
    if word.cls is PositClass.ZERO:
        return Fraction(0)
    if word.cls is PositClass.NAR:
        return None
    return decode(word).value()
