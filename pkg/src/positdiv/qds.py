"""Quotient-digit selection.

Four selection functions are provided, one per recurrence flavour:

* non-restoring (NRD): the digit is the sign of the full residual;
* radix-2 SRT with a non-redundant residual: compare 2w against +-1/2;
* radix-2 SRT with a carry-save residual: a 4-bit estimate of 2w;
* radix-4 SRT (digit set {-2..2}): either a divisor-dependent table
  indexed by a 7-bit estimate of 4w and four divisor bits, or, with the
  divisor prescaled close to 1, a divisor-independent 6-bit comparison.

All values are in the internal convention where significands lie in
[1/2, 1). Estimates are fixed-point codes with three integer bits; a code
is the two's-complement truncation, so the true shifted residual lies in
[est, est + err) with err the accumulated truncation error.

The radix-4 table is derived here rather than transcribed: every cell
(divisor interval x estimate cell) is checked against the exact region of
reachable (d, r*w) points, and the digit closest to zero among those that
keep the next residual inside |w| <= rho*d is chosen.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

INVALID = -128
INT_BITS = 3

HALF = Fraction(1, 2)


class SelectionError(ValueError):
    """An estimate outside the range a selection function is defined on."""


@dataclass(frozen=True)
class DigitSet:
    radix: int
    a: int

    def __post_init__(self):
        if self.radix not in (2, 4):
            raise ValueError(f"radix {self.radix} not supported")
        if not -(-self.radix // 2) <= self.a <= self.radix - 1:
            raise ValueError(f"max digit {self.a} invalid for radix {self.radix}")

    @property
    def rho(self) -> Fraction:
        return Fraction(self.a, self.radix - 1)

    @property
    def digits(self) -> range:
        return range(-self.a, self.a + 1)


RADIX2 = DigitSet(2, 1)
RADIX4 = DigitSet(4, 2)


# Estimate formats: (fractional bits, truncation error bound).
R2_NONREDUNDANT_BITS = 1
R2_CARRYSAVE_BITS = 1
R4_TABLE_BITS = 4
R4_SCALED_BITS = 3
R4_DIVISOR_BITS = 3  # bits after the leading one of d in [1/2, 1)


def select_nrd(w_negative: bool) -> int:
    return -1 if w_negative else 1


def select_r2_nonredundant(y) -> int:
    y = Fraction(y)
    if y >= HALF:
        return 1
    if y >= -HALF:
        return 0
    return -1


def select_r2_carrysave(y) -> int:
    y = Fraction(y)
    if 0 <= y <= Fraction(3, 2):
        return 1
    if y == -HALF:
        return 0
    if Fraction(-5, 2) <= y <= -1:
        return -1
    raise SelectionError(f"radix-2 carry-save estimate {y} outside [-5/2, 3/2]")


_SCALED_RANGES = (
    (2, Fraction(3, 2), Fraction(3)),
    (1, Fraction(1, 2), Fraction(11, 8)),
    (0, Fraction(-1, 2), Fraction(3, 8)),
    (-1, Fraction(-13, 8), Fraction(-5, 8)),
    (-2, Fraction(-13, 4), Fraction(-7, 4)),
)


def select_r4_scaled(y) -> int:
    y = Fraction(y)
    for k, lo, hi in _SCALED_RANGES:
        if lo <= y <= hi:
            return k
    raise SelectionError(f"scaled radix-4 estimate {y} falls in no digit range")


def select_r4_table(y, d_hat, table: SelectionTable | None = None) -> int:
    """Table lookup; ``d_hat`` is the divisor truncated to 0.1xxx."""
    table = table or load_r4_table()
    return table.select(Fraction(y), Fraction(d_hat))


# ---------------------------------------------------------------------------
# Containment geometry


def _clip(poly, a, b, c):
    """Keep the part of a convex polygon where a*d + b*y + c >= 0."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = a * p[0] + b * p[1] + c
        fq = a * q[0] + b * q[1] + c
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0) and fp != 0 and fq != 0:
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _area2(poly):
    return sum(p[0] * q[1] - q[0] * p[1] for p, q in zip(poly, poly[1:] + poly[:1]))


def reachable_region(d_lo, d_hi, y_lo, y_hi, reach):
    """Closure of {d in [d_lo, d_hi), y in [y_lo, y_hi), |y| <= reach*d}.

    Returns the vertex list, or [] when the set is empty. Because the cone
    only ever grazes the open upper edges, the set is empty exactly when
    its closure has zero area. Since the digit conditions are closed
    half-planes, checking them on the closure's vertices is exact.
    """
    poly = [(d_lo, y_lo), (d_hi, y_lo), (d_hi, y_hi), (d_lo, y_hi)]
    poly = _clip(poly, reach, Fraction(-1), Fraction(0))
    if poly:
        poly = _clip(poly, reach, Fraction(1), Fraction(0))
    return poly if len(poly) >= 3 and _area2(poly) != 0 else []


def digit_fits(poly, k: int, rho: Fraction) -> bool:
    """True when y - k*d stays in [-rho*d, rho*d] over the whole region."""
    return all((k - rho) * d <= y <= (k + rho) * d for d, y in poly)


def feasible_digits(poly, ds: DigitSet) -> list[int]:
    return [k for k in ds.digits if digit_fits(poly, k, ds.rho)]


def preferred(digits: list[int]) -> int:
    """Smallest magnitude, then the lower digit."""
    return min(digits, key=lambda k: (abs(k), k))


class InfeasibleCell(ArithmeticError):
    def __init__(self, d_hat, y_hat):
        self.d_hat = d_hat
        self.y_hat = y_hat
        super().__init__(f"no bound-preserving digit at d_hat={d_hat}, y_hat={y_hat}")


def verify_selection(select, d_ranges, frac_bits: int, err: Fraction, ds: DigitSet):
    """Check a selection rule cell by cell.

    ``select(y, row)`` returns the digit for estimate ``y`` in divisor range
    number ``row`` (or raises SelectionError). Returns the number of
    reachable cells checked; raises InfeasibleCell on the first failure.
    """
    reach = ds.radix * ds.rho
    step = Fraction(1, 1 << frac_bits)
    lo_code = -(1 << (INT_BITS - 1 + frac_bits))
    checked = 0
    for row, (d_lo, d_hi) in enumerate(d_ranges):
        for code in range(lo_code, -lo_code):
            y = code * step
            poly = reachable_region(d_lo, d_hi, y, y + err, reach)
            if not poly:
                continue
            try:
                k = select(y, row)
            except SelectionError:
                raise InfeasibleCell(d_lo, y) from None
            if not digit_fits(poly, k, ds.rho):
                raise InfeasibleCell(d_lo, y)
            checked += 1
    return checked


# ---------------------------------------------------------------------------
# Radix-4 table

R4_TABLE_ERR = Fraction(2, 1 << R4_TABLE_BITS)  # two truncated carry-save words
R4_SCALED_ERR = Fraction(2, 1 << R4_SCALED_BITS)
R2_CARRYSAVE_ERR = Fraction(2, 1 << R2_CARRYSAVE_BITS)
R2_NONREDUNDANT_ERR = Fraction(1, 1 << R2_NONREDUNDANT_BITS)

R2_DIVISOR_RANGE = ((Fraction(1, 2), Fraction(1)),)
R4_SCALED_RANGE = ((Fraction(63, 64), Fraction(9, 8)),)


def r4_divisor_ranges():
    w = Fraction(1, 1 << (R4_DIVISOR_BITS + 1))
    return tuple((HALF + j * w, HALF + (j + 1) * w) for j in range(1 << R4_DIVISOR_BITS))


@dataclass(frozen=True)
class SelectionTable:
    """Radix-4 digit per (divisor row, estimate code); None marks unreachable cells.

    Row j covers d in [1/2 + j/16, 1/2 + (j+1)/16). Column c covers the
    estimate (c + lo)/16 where lo = -64.
    """

    rows: tuple[tuple[int | None, ...], ...]
    frac_bits: int = R4_TABLE_BITS
    divisor_bits: int = R4_DIVISOR_BITS

    @property
    def code_offset(self) -> int:
        return 1 << (INT_BITS - 1 + self.frac_bits)

    def row_of(self, d_hat: Fraction) -> int:
        j = (d_hat - HALF) * (1 << (self.divisor_bits + 1))
        if j.denominator != 1 or not 0 <= j < len(self.rows):
            raise SelectionError(f"divisor estimate {d_hat} is not of the form 0.1xxx")
        return int(j)

    def select(self, y: Fraction, d_hat: Fraction) -> int:
        return self.select_row(y, self.row_of(d_hat))

    def select_row(self, y: Fraction, row: int) -> int:
        c = y * (1 << self.frac_bits) + self.code_offset
        if c.denominator != 1 or not 0 <= c < 2 * self.code_offset:
            raise SelectionError(f"estimate {y} not on the {self.frac_bits}-bit grid")
        k = self.rows[row][int(c)]
        if k is None:
            raise SelectionError(f"estimate {y} unreachable for divisor row {row}")
        return k

    def thresholds(self) -> list[dict[int, Fraction]]:
        """Per row, m_k = smallest estimate that selects digit k or more."""
        out = []
        step = Fraction(1, 1 << self.frac_bits)
        for row in self.rows:
            m = {}
            for c, k in enumerate(row):
                if k is not None:
                    for j in range(-1, k + 1):
                        m.setdefault(j, (c - self.code_offset) * step)
            out.append({k: m[k] for k in sorted(m)})
        return out

    def as_array(self) -> np.ndarray:
        """int8 lookup array [row, unsigned code]; unreachable cells hold INVALID."""
        arr = np.full((len(self.rows), 2 * self.code_offset), INVALID, dtype=np.int8)
        half = self.code_offset
        for j, row in enumerate(self.rows):
            for c, k in enumerate(row):
                if k is not None:
                    # unsigned code of the signed estimate c - half
                    arr[j, (c - half) % (2 * half)] = k
        return arr

    def serialize(self) -> str:
        step = 1 << self.frac_bits
        lines = [
            "# radix-4 quotient-digit selection, digit set {-2..2}",
            f"# rows: divisor d in [1/2 + j/16, 1/2 + (j+1)/16), j = 0..{len(self.rows) - 1}",
            f"# columns: estimate of 4w from {-self.code_offset}/{step} to {self.code_offset - 1}/{step}",
            "# symbols: digits -2..2 as A B 0 1 2 (A=-2, B=-1); '.' unreachable",
        ]
        for j, row in enumerate(self.rows):
            lines.append(f"{j:02d} " + "".join(_SYMBOL[k] for k in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> SelectionTable:
        rows = []
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            label, cells = line.split()
            if int(label) != len(rows):
                raise ValueError(f"table row {label} out of order")
            rows.append(tuple(_DIGIT[ch] for ch in cells))
        return cls(tuple(rows))

    def sha256(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()


_SYMBOL = {None: ".", -2: "A", -1: "B", 0: "0", 1: "1", 2: "2"}
_DIGIT = {v: k for k, v in _SYMBOL.items()}


def build_r4_table() -> SelectionTable:
    """Derive the radix-4 table from the containment geometry."""
    ds = RADIX4
    reach = ds.radix * ds.rho
    step = Fraction(1, 1 << R4_TABLE_BITS)
    half = 1 << (INT_BITS - 1 + R4_TABLE_BITS)
    rows = []
    for d_lo, d_hi in r4_divisor_ranges():
        row = []
        for code in range(-half, half):
            y = code * step
            poly = reachable_region(d_lo, d_hi, y, y + R4_TABLE_ERR, reach)
            if not poly:
                row.append(None)
                continue
            ks = feasible_digits(poly, ds)
            if not ks:
                raise InfeasibleCell(d_lo, y)
            row.append(preferred(ks))
        rows.append(tuple(row))
    return SelectionTable(tuple(rows))


TABLE_RESOURCE = "r4_table.txt"


@lru_cache(maxsize=1)
def load_r4_table() -> SelectionTable:
    text = resources.files("positdiv").joinpath("data", TABLE_RESOURCE).read_text()
    return SelectionTable.parse(text)


def verify_r4_table(table: SelectionTable | None = None) -> int:
    table = table or load_r4_table()
    return verify_selection(
        lambda y, row: table.select_row(y, row), r4_divisor_ranges(), R4_TABLE_BITS, R4_TABLE_ERR, RADIX4
    )


def verify_r4_scaled() -> int:
    return verify_selection(lambda y, row: select_r4_scaled(y), R4_SCALED_RANGE, R4_SCALED_BITS, R4_SCALED_ERR, RADIX4)


def verify_r2_carrysave() -> int:
    return verify_selection(
        lambda y, row: select_r2_carrysave(y), R2_DIVISOR_RANGE, R2_CARRYSAVE_BITS, R2_CARRYSAVE_ERR, RADIX2
    )


def verify_r2_nonredundant() -> int:
    return verify_selection(
        lambda y, row: select_r2_nonredundant(y),
        R2_DIVISOR_RANGE,
        R2_NONREDUNDANT_BITS,
        R2_NONREDUNDANT_ERR,
        RADIX2,
    )


# ---------------------------------------------------------------------------
# Vectorized lookups over unsigned estimate codes


def _code_lut(select, frac_bits: int) -> np.ndarray:
    nb = INT_BITS + frac_bits
    lut = np.full(1 << nb, INVALID, dtype=np.int8)
    for code in range(1 << nb):
        signed = code - (1 << nb) if code >> (nb - 1) else code
        try:
            lut[code] = select(Fraction(signed, 1 << frac_bits))
        except SelectionError:
            pass
    return lut


@lru_cache(maxsize=None)
def r2_nonredundant_lut() -> np.ndarray:
    return _code_lut(select_r2_nonredundant, R2_NONREDUNDANT_BITS)


@lru_cache(maxsize=None)
def r2_carrysave_lut() -> np.ndarray:
    return _code_lut(select_r2_carrysave, R2_CARRYSAVE_BITS)


@lru_cache(maxsize=None)
def r4_scaled_lut() -> np.ndarray:
    return _code_lut(select_r4_scaled, R4_SCALED_BITS)


@lru_cache(maxsize=None)
def r4_table_lut() -> np.ndarray:
    return load_r4_table().as_array()
