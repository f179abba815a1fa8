"""Regime/exponent datapath: combine into a scale factor and split it back.

A posit's scale is sf = 4k + e. The quotient scale is the difference of the
operand scales; since e occupies the two LSBs of sf read as a two's
complement number, splitting is floor division by 4 and the residue mod 4.
Works elementwise on numpy integer arrays as well as on ints.
"""

from __future__ import annotations


def combine(k, e):
    """Scale factor 4k + e of a regime/exponent pair."""
    return 4 * k + e


def split(sf):
    """Inverse of :func:`combine`: (floor(sf / 4), sf mod 4)."""
    return sf >> 2, sf & 3


def subtract_split(sf_x, sf_d, normalize_decrement=0):
    """Quotient (k, e) from operand scales, minus one when the quotient needs normalizing."""
    return split(sf_x - sf_d - normalize_decrement)
