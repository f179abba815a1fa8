"""Operand prescaling for the radix-4 scaled divider.

The divisor, taken as d in [1/2, 1), selects a factor M from its three bits
after the leading one so that M*d lands in [1 - 1/64, 1 + 1/8]. M is always
1 plus one or two powers of two, so both operands are scaled with a
shift-add and no multiplier. Three guard bits keep the result exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lanes import U64, as_u64

GUARD_BITS = 3
SCALED_DIVISOR_LOW = Fraction(63, 64)
SCALED_DIVISOR_HIGH = Fraction(9, 8)


@dataclass(frozen=True)
class ScaleFactor:
    """M = 1 + sum(2**-s for s in shifts)."""

    shifts: tuple[int, ...]

    @property
    def value(self) -> Fraction:
        return 1 + sum((Fraction(1, 1 << s) for s in self.shifts), Fraction(0))

    def components(self) -> str:
        return " + ".join(["1"] + [f"1/{1 << s}" for s in self.shifts])


# Indexed by the three divisor bits after the leading one of 0.1xxx.
SCALE_TABLE = (
    ScaleFactor((1, 1)),
    ScaleFactor((2, 1)),
    ScaleFactor((1, 3)),
    ScaleFactor((1,)),
    ScaleFactor((2, 3)),
    ScaleFactor((2,)),
    ScaleFactor((3,)),
    ScaleFactor((3,)),
)


def pick_scale(d_bits: int) -> ScaleFactor:
    if not 0 <= d_bits < 8:
        raise ValueError(f"scale selector needs three bits, got {d_bits}")
    return SCALE_TABLE[d_bits]


def apply_scale(v: int, m: ScaleFactor) -> int:
    """v*M as an integer with GUARD_BITS more fractional bits than v."""
    out = v << GUARD_BITS
    for s in m.shifts:
        out += v << (GUARD_BITS - s)
    return out


_SHIFT_A = np.array([m.shifts[0] for m in SCALE_TABLE], dtype=np.int64)
_SHIFT_B = np.array([m.shifts[1] if len(m.shifts) > 1 else -1 for m in SCALE_TABLE], dtype=np.int64)


def selector_bits(frac: np.ndarray, frac_bits: int) -> np.ndarray:
    """Top three bits of an f-bit fraction field (zero-extended when shorter)."""
    frac = as_u64(frac)
    if frac_bits >= 3:
        return (frac >> U64(frac_bits - 3)).astype(np.int64) & 7
    return (frac << U64(3 - frac_bits)).astype(np.int64) & 7


def apply_scale_array(v, idx: np.ndarray) -> np.ndarray:
    """Vectorized :func:`apply_scale` with per-lane table rows ``idx``."""
    v = as_u64(v)
    a = _SHIFT_A[idx]
    b = _SHIFT_B[idx]
    out = (v << U64(GUARD_BITS)) + (v << (GUARD_BITS - a).astype(U64))
    second = v << np.maximum(GUARD_BITS - b, 0).astype(U64)
    return out + np.where(b >= 0, second, U64(0))
