from __future__ import annotations

from fractions import Fraction

import numpy as np

from positdiv.prescale import (
    GUARD_BITS,
    SCALE_TABLE,
    SCALED_DIVISOR_HIGH,
    SCALED_DIVISOR_LOW,
    apply_scale,
    apply_scale_array,
    pick_scale,
    selector_bits,
)


def test_table_rows():
    assert pick_scale(0b000).value == 2 and pick_scale(0b000).components() == "1 + 1/2 + 1/2"
    assert pick_scale(0b111).value == Fraction(9, 8) and pick_scale(0b111).components() == "1 + 1/8"
    assert pick_scale(0b011).value == Fraction(3, 2)
    assert [m.value for m in SCALE_TABLE] == [Fraction(v) for v in ("2", "1.75", "1.625", "1.5", "1.375", "1.25", "1.125", "1.125")]


def test_apply_scale_examples():
    # 0.5 * 2 = 1.0; v has one fractional bit here
    assert Fraction(apply_scale(1, pick_scale(0)), 1 << (1 + GUARD_BITS)) == 1
    v = 0b111111  # 63/64
    out = Fraction(apply_scale(v, pick_scale(0b111)), 1 << (6 + GUARD_BITS))
    assert out == Fraction(567, 512)
    assert SCALED_DIVISOR_LOW <= out <= SCALED_DIVISOR_HIGH


def test_every_interval_lands_in_range():
    # interval endpoints are the extremes since M*d is increasing in d
    for bits in range(8):
        lo = Fraction(8 + bits, 16)
        hi = lo + Fraction(1, 16)
        m = pick_scale(bits).value
        assert SCALED_DIVISOR_LOW <= m * lo and m * hi <= SCALED_DIVISOR_HIGH


def test_array_form_matches_scalar():
    fb = 7
    v = np.arange(1 << fb, 1 << (fb + 1), dtype=np.uint64)
    idx = selector_bits(v & np.uint64((1 << fb) - 1), fb)
    out = apply_scale_array(v, idx)
    assert out.tolist() == [apply_scale(int(a), pick_scale(int(i))) for a, i in zip(v, idx)]


def test_selector_pads_short_fractions():
    assert selector_bits(np.array([0b1], dtype=np.uint64), 1).tolist() == [0b100]
