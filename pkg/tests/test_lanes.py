from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from positdiv.lanes import WordFormat, bit_length

WIDTHS = [8, 33, 64, 65, 68, 100, 119]


def _pairs(width):
    word = st.integers(0, (1 << width) - 1)
    return st.lists(st.tuples(word, word), min_size=1, max_size=20)


def test_bit_length_matches_int():
    vals = [0, 1, 2, 3, 255, 256, 2**32, 2**63, 2**64 - 1]
    out = bit_length(np.array(vals, dtype=np.uint64))
    assert out.tolist() == [v.bit_length() for v in vals]


def test_limb_split():
    assert WordFormat(64).lo_bits == 0
    f = WordFormat(68)
    assert (f.hi_bits, f.lo_bits) == (56, 12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(WIDTHS).flatmap(lambda w: st.tuples(st.just(w), _pairs(w))))
def test_arithmetic_matches_python_ints(case):
    width, pairs = case
    f = WordFormat(width)
    m = (1 << width) - 1
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    wa, wb = f.from_ints(a), f.from_ints(b)
    assert (wa + wb).to_ints() == [(x + y) & m for x, y in zip(a, b)]
    assert (wa ^ wb).to_ints() == [x ^ y for x, y in zip(a, b)]
    assert (~wa).to_ints() == [~x & m for x in a]
    assert wa.neg().to_ints() == [-x & m for x in a]
    assert wa.le(wb).tolist() == [x <= y for x, y in zip(a, b)]
    assert wa.div_small(3).to_ints() == [x // 3 for x in a]
    for s in (0, 1, 3, width - 57, width - 1, width):
        if s >= 0:
            assert wa.shl(s).to_ints() == [(x << s) & m for x in a]
    signed = [x - (1 << width) if x >> (width - 1) else x for x in a]
    assert wa.to_signed() == signed
    assert wa.abs().to_ints() == [abs(v) & m for v in signed]


def test_from_u64_places_and_shifts():
    f = WordFormat(70)
    w = f.from_u64(np.array([0xFFFF_FFFF_FFFF_FFFF], dtype=np.uint64), 5)
    assert w.to_ints() == [(0xFFFF_FFFF_FFFF_FFFF << 5) & ((1 << 70) - 1)]
