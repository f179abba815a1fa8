from __future__ import annotations

import numpy as np

from positdiv.scale import combine, split, subtract_split


def test_combine_split_inverse():
    for sf in range(-70, 70):
        k, e = split(sf)
        assert 0 <= e < 4 and combine(k, e) == sf


def test_worked_quotient_scales():
    # X = 55/128 (k=-1, e=2); D = 7/1024 (k=-2, e=0) and 7/16384 (k=-3, e=0)
    sx = combine(-1, 2)
    assert subtract_split(sx, combine(-2, 0)) == (1, 2)
    assert subtract_split(sx, combine(-3, 0)) == (2, 2)
    assert subtract_split(sx, combine(-2, 0), 1) == (1, 1)


def test_arrays():
    k, e = split(np.array([-5, -4, 0, 7]))
    assert k.tolist() == [-2, -1, 0, 1] and e.tolist() == [3, 0, 0, 3]
