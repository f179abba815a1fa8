"""On-the-fly conversion of signed quotient digits.

Two registers are kept: Q, the converted digits so far, and QD = Q - ulp.
Each new digit is appended by concatenation onto one of the two registers,
so no carry ever propagates. Registers hold i*log2(r) bits after i steps
and are read as fractions 0.bbbb; arithmetic is modulo 1, which is why
Q(0) = QD(0) = 0 is consistent (0 - 1 == 0 mod 1).

States work on plain ints or on uint64 numpy arrays (one lane per
division). Array registers wrap at 64 bits, which is the same modulo-1
behaviour provided i*log2(r) <= 64.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lanes import U64


@dataclass(frozen=True)
class OtfState:
    q: object
    qd: object
    i: int
    radix: int

    @property
    def bits(self) -> int:
        return self.i * (self.radix.bit_length() - 1)

    def value(self) -> Fraction:
        """Q as a fraction (scalar states only)."""
        return Fraction(int(self.q), 1 << self.bits)

    def value_qd(self) -> Fraction:
        return Fraction(int(self.qd), 1 << self.bits)

    def q_bits(self) -> str:
        return _fmt(self.q, self.bits)

    def qd_bits(self) -> str:
        return _fmt(self.qd, self.bits)


def _fmt(v, bits: int) -> str:
    return "0." + format(int(v), f"0{bits}b") if bits else "0."


def otf_init(radix: int = 2, lanes: int | None = None) -> OtfState:
    if radix not in (2, 4):
        raise ValueError(f"radix {radix} not supported")
    if lanes is None:
        return OtfState(0, 0, 0, radix)
    z = np.zeros(lanes, dtype=U64)
    return OtfState(z, z.copy(), 0, radix)


def otf_append(s: OtfState, digit) -> OtfState:
    """Append one digit per lane using the concatenation rules."""
    r = s.radix
    a = r // 2 if r == 4 else 1
    bits = (s.i + 1) * (r.bit_length() - 1)
    if isinstance(s.q, np.ndarray):
        q = np.asarray(digit, dtype=np.int64)
        if np.any(np.abs(q) > a):
            raise ValueError("digit outside the digit set")
        mag = np.abs(q).astype(U64)
        rr = U64(r)
        low_q = np.where(q >= 0, mag, rr - mag)
        low_qd = np.where(q > 0, mag - U64(1), rr - U64(1) - mag)
        new_q = np.where(q >= 0, s.q, s.qd) * rr + low_q
        new_qd = np.where(q > 0, s.q, s.qd) * rr + low_qd
        if bits < 64:
            m = U64((1 << bits) - 1)
            new_q &= m
            new_qd &= m
        return OtfState(new_q, new_qd, s.i + 1, r)
    q = int(digit)
    if abs(q) > a:
        raise ValueError(f"digit {q} outside the digit set")
    new_q = s.q * r + q if q >= 0 else s.qd * r + (r - abs(q))
    new_qd = s.q * r + (q - 1) if q > 0 else s.qd * r + (r - 1 - abs(q))
    m = (1 << bits) - 1
    return OtfState(new_q & m, new_qd & m, s.i + 1, r)


def otf_finalize(s: OtfState, negative):
    """QD when the final remainder is negative, else Q."""
    if isinstance(s.q, np.ndarray):
        return np.where(np.asarray(negative, dtype=bool), s.qd, s.q)
    return s.qd if negative else s.q


def convert(digits, radix: int) -> OtfState:
    s = otf_init(radix)
    for q in digits:
        s = otf_append(s, q)
    return s


def digit_sum(digits, radix: int) -> Fraction:
    """Direct summation of sum(q_j * r**-j), the non-redundant reference."""
    total = Fraction(0)
    scale = Fraction(1)
    for q in digits:
        scale /= radix
        total += q * scale
    return total
