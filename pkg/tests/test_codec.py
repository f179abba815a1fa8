from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from positdiv.codec import (
    DecodedPosit,
    PatternError,
    PositClass,
    PositWord,
    decode,
    decode_array,
    encode,
    encode_round,
    encode_round_array,
    parse_pattern,
    value_of,
)
from positdiv.oracle import round_to_posit


def test_classes():
    assert PositWord.zero(8).cls is PositClass.ZERO
    assert PositWord.nar(8).cls is PositClass.NAR
    assert PositWord.one(8).cls is PositClass.NORMAL


def test_decode_worked_operands():
    x = decode(PositWord(0b0011010111, 10))
    assert (x.sign, x.regime, x.exponent, x.fraction, x.frac_bits) == (0, -1, 2, 0b10111, 5)
    assert x.value() == Fraction(55, 128)
    d = decode(PositWord(0b0000100110, 10))
    assert (d.regime, d.exponent, d.fraction, d.frac_bits) == (-3, 0, 0b110, 3)
    assert d.value() == Fraction(7, 16384)


def test_decode_negative_uses_magnitude():
    p = decode(PositWord((-0b0011010111) % 1024, 10))
    assert p.sign == 1 and p.value() == Fraction(-55, 128)


def test_truncated_exponent_reads_as_zero():
    # 0111111110: regime k=7 fills everything but one exponent bit
    p = decode(PositWord(0b0111111110, 10))
    assert p.regime == 7 and p.exponent == 0 and p.frac_bits == 0
    assert decode(PositWord(0b0111111101, 10)).exponent == 2


def test_maxpos_minpos_values():
    assert value_of(PositWord.maxpos(8)) == Fraction(2) ** 24
    assert value_of(PositWord.minpos(8)) == Fraction(2) ** -24
    assert value_of(PositWord.nar(8)) is None


@pytest.mark.parametrize("n", [5, 8, 10, 12])
def test_every_pattern_roundtrips(n):
    for bits in range(1 << n):
        w = PositWord(bits, n)
        assert encode(decode(w)) == w


@pytest.mark.parametrize("n", [6, 9, 13])
def test_decode_array_matches_scalar(n):
    bits = np.arange(1 << n, dtype=np.uint64)
    arr = decode_array(bits, n)
    for b in range(1 << n):
        w = PositWord(b, n)
        if w.cls is not PositClass.NORMAL:
            continue
        p = decode(w)
        assert (int(arr.k[b]), int(arr.e[b]), bool(arr.sign[b])) == (p.regime, p.exponent, bool(p.sign))
        assert int(arr.frac[b]) == p.significand_bits - (1 << (n - 5))


def test_encode_round_worked_examples():
    assert encode_round(0, 1, 1, 0b111101, 6, 1, 10).binary() == "0110011111"
    assert encode_round(0, 2, 1, 0b1111, 4, 1, 10).binary() == "0111010000"
    assert encode_round(0, 0, 0, 0, 0, 0, 16) == PositWord.one(16)


def test_encode_round_saturates():
    assert encode_round(0, 9, 0, 0, 0, 0, 8) == PositWord.maxpos(8)
    assert encode_round(1, -9, 0, 0, 0, 1, 8).bits == (-1) % 256


def test_encode_round_agrees_with_oracle_rounding():
    rng = np.random.default_rng(5)
    for n in (6, 8, 11, 16, 32):
        for _ in range(300):
            k = int(rng.integers(-(n - 1), n - 1))
            e = int(rng.integers(0, 4))
            fb = int(rng.integers(0, 20))
            f = int(rng.integers(0, 1 << fb)) if fb else 0
            sticky = int(rng.integers(0, 2))
            sign = int(rng.integers(0, 2))
            v = Fraction(2) ** (4 * k + e) * (1 + Fraction(f, 1 << fb) + Fraction(sticky, 1 << (fb + 70)))
            want = round_to_posit(-v if sign else v, n)
            assert encode_round(sign, k, e, f, fb, sticky, n) == want, (n, k, e, f, fb, sticky)


def test_encode_round_array_vectorizes():
    out = encode_round_array(
        np.array([0, 1]), np.array([1, 1]), np.array([1, 1], dtype=np.uint64), np.array([0b111101, 0b111101], dtype=np.uint64), 6, np.array([1, 1]), 10
    )
    assert out.tolist() == [0b0110011111, (-0b0110011111) % 1024]


def test_parse_pattern_forms():
    assert parse_pattern("0011010111", 10) == 0b0011010111
    assert parse_pattern("0x19f", 10) == 0x19F
    assert parse_pattern("0b0011010111", 10) == 0b0011010111
    assert parse_pattern("415", 10) == 415
    assert PositWord.parse("0110_0111_11", 10).binary() == "0110011111"


@pytest.mark.parametrize(
    "text, msg",
    [
        ("00110101x1", "position 8"),
        ("0x1g", "position 3"),
        ("0b0101", "4 bits"),
        ("4096", "does not fit"),
        ("", "empty"),
    ],
)
def test_parse_pattern_errors(text, msg):
    with pytest.raises(PatternError, match=msg):
        parse_pattern(text, 10)


def test_decoded_posit_rejects_specials():
    with pytest.raises(ValueError):
        DecodedPosit(PositClass.NAR, 8).value()
