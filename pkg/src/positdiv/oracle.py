"""Exact reference division.

Operands are decoded to exact rationals, divided with Python integers, and
rounded to the nearest posit. Nothing here is shared with the divider or
with the codec's encoder: patterns are decoded by a separate routine and
rounding is done by locating the exact value between two consecutive
patterns and comparing it with the value of the midpoint pattern (the
n+1-bit pattern between them), ties going to the even pattern.
"""

from __future__ import annotations

from fractions import Fraction

from .codec import DecodedPosit, PositClass, PositWord

ES = 2


def pattern_value(u: int, n: int) -> tuple[int, int]:
    """Value of a positive n-bit pattern (0 < u < 2**(n-1)) as (m, x) with value m * 2**x."""
    body = n - 1
    if (u >> (body - 1)) & 1:
        run = body - ((~u) & ((1 << body) - 1)).bit_length()
        k = run - 1
    else:
        run = body - u.bit_length()
        k = -run
    rest = body - min(run + 1, body)
    tail = u & ((1 << rest) - 1)
    # exponent and fraction bits, zero-extended if the regime cut them off
    if rest >= ES:
        e = tail >> (rest - ES)
        fb = rest - ES
        f = tail & ((1 << fb) - 1)
    else:
        e = tail << (ES - rest)
        fb, f = 0, 0
    return (1 << fb) | f, 4 * k + e - fb


def value(bits: int, n: int) -> Fraction | None:
    """Real value of an n-bit pattern; None for NaR."""
    if bits == 0:
        return Fraction(0)
    if bits == 1 << (n - 1):
        return None
    neg = bits >> (n - 1)
    u = ((1 << n) - bits) if neg else bits
    m, x = pattern_value(u, n)
    v = Fraction(m << x) if x >= 0 else Fraction(m, 1 << -x)
    return -v if neg else v


def exact_value(p: DecodedPosit) -> Fraction:
    if p.cls is not PositClass.NORMAL:
        raise ValueError(f"{p.cls.value} has no exact value")
    v = Fraction(2) ** (4 * p.regime + p.exponent) * (1 + Fraction(p.fraction, 1 << p.frac_bits))
    return -v if p.sign else v


def _cmp(m: int, x: int, p: int, q: int) -> int:
    """Sign of m*2**x - p/q for positive m, p, q."""
    if x >= 0:
        a, b = (m << x) * q, p
    else:
        a, b = m * q, p << -x
    return (a > b) - (a < b)


def _floor_log2(p: int, q: int) -> int:
    s = p.bit_length() - q.bit_length()
    if (p << max(-s, 0)) < (q << max(s, 0)):
        s -= 1
    return s


def round_magnitude(p: int, q: int, n: int) -> int:
    """Nearest positive n-bit pattern to p/q > 0 (saturating)."""
    body = n - 1
    s = _floor_log2(p, q)
    k, e = s >> 2, s & 3
    if k >= n - 2:
        return (1 << body) - 1
    if k < -(n - 2):
        return 1
    if k >= 0:
        rl = k + 2
        regime = ((1 << (k + 1)) - 1) << 1
    else:
        rl = -k + 1
        regime = 1
    avail = body - rl
    # tail = floor((e + f) * 2**(avail-2)) with f = p/(q*2**s) - 1
    num = p * (1 << max(-s, 0))
    den = q * (1 << max(s, 0))
    # (e + num/den - 1) * 2**(avail - 2)
    tnum = (e * den + num - den)
    if avail >= 2:
        tail = (tnum << (avail - 2)) // den
    else:
        tail = tnum // (den << (2 - avail))
    u = (regime << avail) | tail
    lo_m, lo_x = pattern_value(u, n)
    if _cmp(lo_m, lo_x, p, q) > 0:
        raise AssertionError("oracle floor candidate above the value")
    if u + 1 < (1 << body):
        hi_m, hi_x = pattern_value(u + 1, n)
        if _cmp(hi_m, hi_x, p, q) <= 0:
            raise AssertionError("oracle floor candidate not the floor")
    mid_m, mid_x = pattern_value(2 * u + 1, n + 1)
    c = _cmp(mid_m, mid_x, p, q)
    if c < 0 or (c == 0 and u & 1):
        u += 1
    return u


def round_to_posit(v, n: int) -> PositWord:
    v = Fraction(v)
    if v == 0:
        return PositWord.zero(n)
    u = round_magnitude(abs(v.numerator), v.denominator, n)
    return PositWord(((1 << n) - u) if v < 0 else u, n)


def divide_bits(x: int, d: int, n: int) -> int:
    """Oracle quotient pattern of two n-bit patterns."""
    nar = 1 << (n - 1)
    if d == 0 or d == nar or x == nar:
        return nar
    if x == 0:
        return 0
    sx, sd = x >> (n - 1), d >> (n - 1)
    ux = ((1 << n) - x) if sx else x
    ud = ((1 << n) - d) if sd else d
    mx, ex = pattern_value(ux, n)
    md, ed = pattern_value(ud, n)
    # (mx/md) * 2**(ex-ed)
    sh = ex - ed
    p, q = (mx << sh, md) if sh >= 0 else (mx, md << -sh)
    u = round_magnitude(p, q, n)
    return ((1 << n) - u) if sx ^ sd else u


def divide(x: PositWord, d: PositWord) -> PositWord:
    if x.width != d.width:
        raise ValueError("operand widths differ")
    return PositWord(divide_bits(x.bits, d.bits, x.width), x.width)
