"""Partial-remainder datapath.

Residuals are fixed-point two's-complement registers with ``INT_BITS``
integer bits (sign included) and a configurable number of fractional bits,
one register per lane. A residual is either non-redundant (one word) or
carry-save (sum word ``ws`` plus carry word ``wc``, value ws + wc mod 2**W).

Values here are in the divider's internal units, where significands are
taken in [1/2, 1). With |w| <= rho*d and d < 9/8, the shifted residual r*w
stays inside [-4, 4), which is what three integer bits hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .lanes import U64, WordFormat, Words, as_u64

INT_BITS = 3


class ConvergenceError(ArithmeticError):
    """A residual left the convergence bound |w| <= rho*d."""

    def __init__(self, lanes, message=None):
        self.lanes = list(lanes)
        super().__init__(message or f"residual bound violated in lanes {self.lanes[:8]}")


def redundancy_shift(rho: Fraction) -> int:
    """log2 of the initial right shift: x/2 when rho == 1, x/4 when 1/2 < rho < 1."""
    rho = Fraction(rho)
    if rho == 1:
        return 1
    if Fraction(1, 2) < rho < 1:
        return 2
    raise ValueError(f"redundancy factor {rho} outside (1/2, 1]")


@dataclass(frozen=True)
class ResidualFormat:
    frac_bits: int
    int_bits: int = INT_BITS

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits

    @cached_property
    def words(self) -> WordFormat:
        return WordFormat(self.width)

    def encode(self, values) -> Words:
        """Exact fixed-point encoding of rationals; raises if one does not fit."""
        ints = []
        lim = Fraction(1 << (self.int_bits - 1))
        for v in values:
            v = Fraction(v)
            scaled = v * (1 << self.frac_bits)
            if scaled.denominator != 1:
                raise ValueError(f"{v} needs more than {self.frac_bits} fractional bits")
            if not -lim <= v < lim:
                raise ValueError(f"{v} outside the [-{lim}, {lim}) integer range")
            ints.append(int(scaled))
        return self.words.from_ints(ints)

    def decode(self, w: Words) -> list[Fraction]:
        return [Fraction(v, 1 << self.frac_bits) for v in w.to_signed()]


@dataclass
class Residual:
    fmt: ResidualFormat
    ws: Words
    wc: Words | None = None

    @property
    def redundant(self) -> bool:
        return self.wc is not None

    def assimilate(self) -> Words:
        """Carry-propagate ws + wc (the slow path the lookahead network avoids)."""
        return self.ws if self.wc is None else self.ws + self.wc

    def values(self) -> list[Fraction]:
        return self.fmt.decode(self.assimilate())

    def __len__(self):
        return len(self.ws)

    @classmethod
    def from_values(cls, fmt: ResidualFormat, ws, wc=None) -> Residual:
        return cls(fmt, fmt.encode(ws), None if wc is None else fmt.encode(wc))


def init_words(x, x_frac_bits: int, rho, fmt: ResidualFormat, redundant: bool) -> Residual:
    """w(0) = x/2 or x/4 from significands given as integers with ``x_frac_bits`` bits."""
    p = redundancy_shift(rho)
    shift = fmt.frac_bits - x_frac_bits - p
    if shift < 0:
        raise ValueError("residual format too narrow for the initial shift")
    ws = fmt.words.from_u64(as_u64(x), shift)
    return Residual(fmt, ws, fmt.words.zeros(len(ws)) if redundant else None)


def init(x, rho, fmt: ResidualFormat | None = None, redundant: bool = True) -> Residual:
    """w(0) for rational significands ``x`` (a value or a sequence)."""
    xs = [Fraction(v) for v in (x if isinstance(x, (list, tuple)) else [x])]
    p = redundancy_shift(rho)
    if fmt is None:
        need = max(v.denominator.bit_length() - 1 for v in xs)
        fmt = ResidualFormat(need + p)
    w0 = [v / (1 << p) for v in xs]
    ws = fmt.encode(w0)
    return Residual(fmt, ws, fmt.words.zeros(len(ws)) if redundant else None)


def carry_save_add(a: Words, b: Words, c: Words) -> tuple[Words, Words]:
    """One row of full adders: a + b + c == s + t (mod 2**W), no carry ripple."""
    s = a ^ b ^ c
    t = ((a & b) | (a & c) | (b & c)).shl(1)
    return s, t


def divisor_multiple(d: Words, digits: np.ndarray) -> tuple[Words, np.ndarray]:
    """Addend for -q*d in two's complement, plus the carry-in to inject.

    Only |q| <= 2 is supported, so every multiple is a wire shift of d.
    """
    digits = np.asarray(digits, dtype=np.int64)
    mag = np.abs(digits)
    zero = d.fmt.zeros(len(d))
    m = Words.select(mag == 2, d.shl(1), Words.select(mag == 1, d, zero))
    pos = digits > 0
    return Words.select(pos, ~m, m), pos.astype(U64)


def step(w: Residual, d: Words, digits, radix: int, bound: Words | None = None) -> Residual:
    """w(i+1) = r*w(i) - q*d, lane-wise.

    Carry-save residuals go through a single carry-save adder row; the
    two's-complement carry-in fills the empty LSB of the shifted carry word.
    Non-redundant residuals use a full-width addition. With ``bound`` given,
    any lane ending outside [-bound, bound] raises ConvergenceError.
    """
    s = radix.bit_length() - 1
    digits = np.asarray(digits, dtype=np.int64)
    if np.any(np.abs(digits) > (1 if radix == 2 else 2)):
        raise ValueError("quotient digit outside the digit set")
    addend, cin = divisor_multiple(d, digits)
    rs = w.ws.shl(s)
    if w.redundant:
        total, carry = carry_save_add(rs, w.wc.shl(s), addend)
        out = Residual(w.fmt, total, carry.add_bit(cin))
    else:
        out = Residual(w.fmt, (rs + addend).add_bit(cin))
    if bound is not None:
        bad = bound_violations(out, bound)
        if bad.any():
            raise ConvergenceError(np.flatnonzero(bad))
    return out


def residual_bound(d: Words, rho) -> Words:
    """floor(rho*d) in register units; |w| <= rho*d iff |w| <= floor(rho*d)."""
    rho = Fraction(rho)
    if rho == 1:
        return d
    if rho == Fraction(2, 3):
        return d.shl(1).div_small(3)
    raise ValueError(f"unsupported redundancy factor {rho}")


def bound_violations(w: Residual, bound: Words) -> np.ndarray:
    return ~w.assimilate().abs().le(bound)


def estimate(w: Residual, radix: int, frac_bits: int) -> np.ndarray:
    """Truncated shifted residual as (INT_BITS + frac_bits)-bit codes.

    Each carry-save component is truncated separately and the two short
    words are added modulo the window, as a small adder would do.
    """
    s = radix.bit_length() - 1
    nb = w.fmt.int_bits + frac_bits
    m = U64((1 << nb) - 1)
    code = w.ws.top(nb + s) & m
    if w.redundant:
        code = code + (w.wc.top(nb + s) & m)
    return code & m


def code_value(code: int, int_bits: int, frac_bits: int) -> Fraction:
    """Signed value of an estimate code."""
    nb = int_bits + frac_bits
    code = int(code)
    if code >> (nb - 1):
        code -= 1 << nb
    return Fraction(code, 1 << frac_bits)


def sign_zero_full(w: Residual) -> tuple[np.ndarray, np.ndarray]:
    """Reference sign/zero flags from a carry-propagate addition."""
    total = w.assimilate()
    return total.msb(), total.is_zero()


def sign_zero_lookahead(ws: Words, wc: Words) -> tuple[np.ndarray, np.ndarray]:
    """Sign and zero of ws + wc without assimilating the carry-save pair.

    Sign: MSB half-sum XOR the carry into the MSB, the carry coming from a
    Kogge-Stone generate/propagate prefix tree (log2 W levels). Zero: the
    sum is 0 mod 2**W exactly when ws XOR wc equals (ws OR wc) shifted left
    by one, a bitwise test followed by a wide NOR.
    """
    width = ws.fmt.width
    g = ws & wc
    p = ws ^ wc
    big_g, big_p = g, p
    k = 1
    while k < width:
        big_g = big_g | (big_p & big_g.shl(k))
        big_p = big_p & big_p.shl(k)
        k <<= 1
    carry_into_msb = big_g.shl(1).msb()
    negative = p.msb() ^ carry_into_msb
    zero = (p ^ (ws | wc).shl(1)).is_zero()
    return negative, zero
