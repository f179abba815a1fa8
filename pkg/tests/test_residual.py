from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from positdiv.lanes import WordFormat
from positdiv.residual import (
    ConvergenceError,
    Residual,
    ResidualFormat,
    carry_save_add,
    code_value,
    estimate,
    init,
    redundancy_shift,
    residual_bound,
    sign_zero_full,
    sign_zero_lookahead,
    step,
)

FMT = ResidualFormat(10)


def test_nonredundant_step():
    w = Residual.from_values(FMT, [Fraction(55, 64)])
    d = FMT.encode([Fraction(7, 4)])
    assert step(w, d, [1], 2).values() == [Fraction(-1, 32)]


def test_carry_save_step():
    w = Residual.from_values(FMT, [Fraction(1, 4)], [Fraction(1, 4)])
    d = FMT.encode([Fraction(3, 2)])
    out = step(w, d, [0], 4)
    assert out.redundant and out.values() == [Fraction(2)]


@pytest.mark.parametrize("digit", [-2, -1, 0, 1, 2])
def test_carry_save_step_all_digits(digit):
    fmt = ResidualFormat(12)
    rng = random.Random(digit)
    for _ in range(200):
        d = Fraction(rng.randrange(512, 1024), 1024)
        ws = Fraction(rng.randrange(-512, 512), 2048)
        wc = Fraction(rng.randrange(-512, 512), 2048)
        w = Residual.from_values(fmt, [ws], [wc])
        out = step(w, fmt.encode([d]), [digit], 4)
        assert out.values() == [4 * (ws + wc) - digit * d]


def test_init_shifts():
    assert init(1, 1).values() == [Fraction(1, 2)]
    assert init(1, Fraction(2, 3)).values() == [Fraction(1, 4)]
    assert redundancy_shift(Fraction(2, 3)) == 2
    with pytest.raises(ValueError):
        redundancy_shift(Fraction(1, 2))


def test_bound_check_raises():
    w = Residual.from_values(FMT, [Fraction(3, 4)])
    d = FMT.encode([Fraction(1, 2)])
    with pytest.raises(ConvergenceError):
        step(w, d, [0], 2, bound=residual_bound(d, 1))


def test_residual_bound_floors():
    d = FMT.encode([Fraction(3, 4)])
    assert FMT.decode(residual_bound(d, Fraction(2, 3))) == [Fraction(1, 2)]
    d = FMT.encode([Fraction(1023, 1024)])
    assert FMT.decode(residual_bound(d, Fraction(2, 3))) == [Fraction(682, 1024)]


def test_estimate_truncates_each_word():
    fmt = ResidualFormat(8)
    ws, wc = Fraction(5, 64), Fraction(7, 64)
    w = Residual.from_values(fmt, [ws], [wc])
    code = estimate(w, 2, 1)[0]
    # 2*ws = 0.15625 -> 0, 2*wc = 0.21875 -> 0
    assert code_value(code, 3, 1) == 0
    est = code_value(estimate(w, 4, 4)[0], 3, 4)
    assert 0 <= 4 * (ws + wc) - est < Fraction(2, 16)


def test_estimate_negative_window():
    w = Residual.from_values(FMT, [Fraction(-3, 8)])
    assert code_value(estimate(w, 2, 1)[0], 3, 1) == Fraction(-1)


def test_carry_save_add_preserves_sum():
    f = WordFormat(20)
    rng = random.Random(3)
    a, b, c = ([rng.getrandbits(20) for _ in range(300)] for _ in range(3))
    s, t = carry_save_add(f.from_ints(a), f.from_ints(b), f.from_ints(c))
    assert (s + t).to_ints() == [(x + y + z) % (1 << 20) for x, y, z in zip(a, b, c)]


def test_lookahead_exhaustive_small():
    f = WordFormat(6)
    a = [x for x in range(64) for _ in range(64)]
    b = [y for _ in range(64) for y in range(64)]
    neg, zero = sign_zero_lookahead(f.from_ints(a), f.from_ints(b))
    sums = [(x + y) % 64 for x, y in zip(a, b)]
    assert neg.tolist() == [bool(s >> 5) for s in sums]
    assert zero.tolist() == [s == 0 for s in sums]


@pytest.mark.parametrize("width", [13, 64, 65, 68, 119])
def test_lookahead_matches_full_addition(width):
    f = WordFormat(width)
    rng = random.Random(width)
    a = [rng.getrandbits(width) for _ in range(3000)]
    b = [rng.getrandbits(width) for _ in range(1000)] + [(-x) % (1 << width) for x in a[1000:2000]]
    b += [(-x - 1) % (1 << width) for x in a[2000:]]
    w = Residual(ResidualFormat(width - 3), f.from_ints(a), f.from_ints(b))
    neg, zero = sign_zero_lookahead(w.ws, w.wc)
    fneg, fzero = sign_zero_full(w)
    assert np.array_equal(neg, fneg) and np.array_equal(zero, fzero)
    assert zero.sum() == 1000 + sum(1 for x, y in zip(a[:1000], b[:1000]) if (x + y) % (1 << width) == 0)


def test_format_encode_rejects_inexact():
    with pytest.raises(ValueError):
        ResidualFormat(2).encode([Fraction(1, 8)])
    with pytest.raises(ValueError):
        ResidualFormat(2).encode([Fraction(4)])
