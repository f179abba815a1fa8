"""Posit division by digit recurrence.

A division goes through the same stages for every variant:

1. decode both operands; NaR and zero cases are flagged and their lanes
   carry a dummy 1.0 through the datapath;
2. form significands in [1/2, 1) and, for the scaled radix-4 variant,
   multiply both by the shift-add factor M;
3. run It iterations of w <- r*w - q*d with the variant's digit selection;
4. terminate: take the sign and zero of the last residual, pick Q or QD
   (or subtract one ulp), normalize into [1, 2) and round.

Everything runs over numpy lanes, so a batch of operand pairs is divided
at once. ``divide`` runs a single lane and records a trace.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import qds, scale
from .codec import PositWord, decode_array, encode_round_array
from .lanes import U64, umask
from .otf import otf_append, otf_finalize, otf_init
from .prescale import GUARD_BITS, SCALE_TABLE, apply_scale_array, selector_bits
from .residual import (
    INT_BITS,
    ConvergenceError,
    Residual,
    ResidualFormat,
    bound_violations,
    carry_save_add,
    code_value,
    estimate,
    init_words,
    redundancy_shift,
    residual_bound,
    sign_zero_lookahead,
    step,
)

MIN_WIDTH = 5
MAX_WIDTH = 64
CHUNK = 1 << 17


class Variant(str, enum.Enum):
    NRD = "nrd"
    SRT = "srt"
    SRT_CS = "srt-cs"
    SRT_CS_OF = "srt-cs-of"
    SRT_CS_OF_FR = "srt-cs-of-fr"

    @property
    def redundant(self) -> bool:
        return self in (Variant.SRT_CS, Variant.SRT_CS_OF, Variant.SRT_CS_OF_FR)

    @property
    def on_the_fly(self) -> bool:
        return self in (Variant.SRT_CS_OF, Variant.SRT_CS_OF_FR)

    @property
    def fast_remainder(self) -> bool:
        return self is Variant.SRT_CS_OF_FR


class InvariantError(ArithmeticError):
    """A datapath invariant failed; the result would not be trustworthy."""


def iteration_count(n: int, r: int, rho) -> tuple[int, int]:
    """(h, It): quotient bits needed and digit iterations."""
    h = n - 1 - math.floor(Fraction(rho))
    return h, -(-h // (r.bit_length() - 1))


@dataclass(frozen=True)
class DivisionConfig:
    variant: Variant
    radix: int = 2
    scaled: bool = False
    width: int = 16

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not MIN_WIDTH <= self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in [{MIN_WIDTH}, {MAX_WIDTH}], got {self.width}")
        if self.radix not in (2, 4):
            raise ValueError(f"radix must be 2 or 4, got {self.radix}")
        if self.radix == 4 and not self.variant.redundant:
            raise ValueError(f"{self.variant.value} is radix-2 only")
        if self.scaled and self.radix != 4:
            raise ValueError("operand scaling is only used with radix 4")

    @property
    def name(self) -> str:
        return f"{self.variant.value}/r{self.radix}" + ("s" if self.scaled else "")

    @property
    def digit_set(self) -> qds.DigitSet:
        return qds.RADIX2 if self.radix == 2 else qds.RADIX4

    @property
    def rho(self) -> Fraction:
        return self.digit_set.rho

    @property
    def log2r(self) -> int:
        return self.radix.bit_length() - 1

    @property
    def iterations(self) -> int:
        return iteration_count(self.width, self.radix, self.rho)[1]

    @property
    def latency(self) -> int:
        return latency(self)

    @property
    def significand_bits(self) -> int:
        """Fractional bits of a significand taken in [1/2, 1)."""
        return self.width - 4 + (GUARD_BITS if self.scaled else 0)

    @property
    def estimate_bits(self) -> int:
        if self.variant is Variant.NRD:
            return 0
        if self.radix == 2:
            return qds.R2_CARRYSAVE_BITS if self.variant.redundant else qds.R2_NONREDUNDANT_BITS
        return qds.R4_SCALED_BITS if self.scaled else qds.R4_TABLE_BITS

    @property
    def residual_format(self) -> ResidualFormat:
        p = redundancy_shift(self.rho)
        return ResidualFormat(max(self.significand_bits + p, self.estimate_bits + self.log2r))

    @property
    def nominal_residual_width(self) -> int:
        """Register width by the usual sizing rule, n - 2 + log2(r) - floor(rho)."""
        return self.width - 2 + self.log2r - math.floor(self.rho)

    @property
    def quotient_frac_bits(self) -> int:
        """Fractional bits of x/d held by the converted quotient register."""
        return self.iterations * self.log2r - redundancy_shift(self.rho)


def latency(cfg: DivisionConfig) -> int:
    """Decode + It iterations + termination + encode, plus one cycle for scaling."""
    return cfg.iterations + 3 + (1 if cfg.scaled else 0)


def all_configs(width: int) -> list[DivisionConfig]:
    out = [DivisionConfig(Variant.NRD, 2, False, width), DivisionConfig(Variant.SRT, 2, False, width)]
    for v in (Variant.SRT_CS, Variant.SRT_CS_OF, Variant.SRT_CS_OF_FR):
        out += [DivisionConfig(v, 2, False, width), DivisionConfig(v, 4, False, width), DivisionConfig(v, 4, True, width)]
    return out


def parse_config(name: str, width: int) -> DivisionConfig:
    """Inverse of ``DivisionConfig.name``, e.g. ``srt-cs-of/r4s``."""
    variant, _, tail = name.partition("/")
    tail = tail or "r2"
    if not tail.startswith("r") or tail[1:].rstrip("s") not in ("2", "4"):
        raise ValueError(f"bad configuration name {name!r}")
    return DivisionConfig(Variant(variant), int(tail[1]), tail.endswith("s"), width)


# ---------------------------------------------------------------------------
# Vectorized core


@dataclass
class BatchResult:
    bits: np.ndarray
    bound_violations: np.ndarray
    selection_errors: np.ndarray
    flag_mismatches: np.ndarray
    range_errors: np.ndarray

    @property
    def bad(self) -> np.ndarray:
        return self.bound_violations | self.selection_errors | self.flag_mismatches | self.range_errors

    def counts(self) -> dict[str, int]:
        return {
            "bound_violations": int(self.bound_violations.sum()),
            "selection_errors": int(self.selection_errors.sum()),
            "flag_mismatches": int(self.flag_mismatches.sum()),
            "range_errors": int(self.range_errors.sum()),
        }


class _Lanes:
    """Per-run state shared by the iteration loop and the terminator."""

    def __init__(self, cfg: DivisionConfig, xb, db):
        n = cfg.width
        self.cfg = cfg
        self.dx = decode_array(xb, n)
        self.dd = decode_array(db, n)
        self.nar = self.dx.nar | self.dd.nar | self.dd.zero
        self.zero = self.dx.zero & ~self.nar
        special = self.dx.nar | self.dx.zero | self.dd.nar | self.dd.zero
        lead = U64(1 << (n - 5))
        self.xs = np.where(special, lead, lead | self.dx.frac)
        self.ds = np.where(special, lead, lead | self.dd.frac)
        self.scale_index = None
        if cfg.scaled:
            self.scale_index = selector_bits(self.ds & umask(n - 5), n - 5)
            self.xs = apply_scale_array(self.xs, self.scale_index)
            self.ds = apply_scale_array(self.ds, self.scale_index)


def _selector(cfg: DivisionConfig, ds: np.ndarray):
    """Return ``select(w) -> (codes, digits)`` for the configured variant."""
    v = cfg.variant
    if v is Variant.NRD:
        return lambda w: (None, np.where(w.ws.msb(), -1, 1).astype(np.int64))
    t = cfg.estimate_bits
    if cfg.radix == 2:
        lut = qds.r2_carrysave_lut() if v.redundant else qds.r2_nonredundant_lut()
        return lambda w: _lookup(estimate(w, 2, t), lut)
    if cfg.scaled:
        lut = qds.r4_scaled_lut()
        return lambda w: _lookup(estimate(w, 4, t), lut)
    lut2 = qds.r4_table_lut()
    g = cfg.significand_bits
    shift = g - 1 - qds.R4_DIVISOR_BITS
    rows = ((ds >> U64(shift)) if shift >= 0 else (ds << U64(-shift))).astype(np.int64) & 7

    def select(w):
        code = estimate(w, 4, t)
        return code, lut2[rows, code.astype(np.int64)].astype(np.int64)

    return select


def _lookup(code, lut):
    return code, lut[code.astype(np.int64)].astype(np.int64)


def _run(cfg: DivisionConfig, xb, db, check: bool = True, recorder=None) -> BatchResult:
    n = cfg.width
    lanes = _Lanes(cfg, xb, db)
    size = len(lanes.xs)
    fmt = cfg.residual_format
    words = fmt.words
    g = cfg.significand_bits
    r = cfg.radix
    it = cfg.iterations
    qbits = it * cfg.log2r
    qmask = umask(qbits) if qbits < 64 else U64(0xFFFF_FFFF_FFFF_FFFF)

    w = init_words(lanes.xs, g, cfg.rho, fmt, cfg.variant.redundant)
    d = words.from_u64(lanes.ds, fmt.frac_bits - g)
    bound = residual_bound(d, cfg.rho)
    select = _selector(cfg, lanes.ds)

    viol = np.zeros(size, dtype=bool)
    selerr = np.zeros(size, dtype=bool)
    if cfg.variant.on_the_fly:
        otf = otf_init(r, size)
    else:
        qpos = np.zeros(size, dtype=U64)
        qneg = np.zeros(size, dtype=U64)
    rr = U64(r)

    for i in range(1, it + 1):
        codes, digits = select(w)
        invalid = digits == qds.INVALID
        if invalid.any():
            selerr |= invalid
            digits = np.where(invalid, 0, digits)
        w_prev = w
        w = step(w, d, digits, r)
        if check:
            viol |= bound_violations(w, bound)
        if cfg.variant.on_the_fly:
            otf = otf_append(otf, digits)
        else:
            qpos = (qpos * rr + np.maximum(digits, 0).astype(U64)) & qmask
            qneg = (qneg * rr + np.maximum(-digits, 0).astype(U64)) & qmask
        if recorder is not None:
            q_reg, qd_reg = (otf.q, otf.qd) if cfg.variant.on_the_fly else ((qpos - qneg) & qmask, None)
            recorder.row(i, w_prev, codes, digits, w, q_reg, qd_reg)

    # termination: sign and zero of the final residual
    mism = np.zeros(size, dtype=bool)
    full = w.assimilate()
    full_neg = full.msb()
    full_zero = np.where(full_neg, (full + d).is_zero(), full.is_zero())
    if cfg.variant.fast_remainder:
        neg, zw = sign_zero_lookahead(w.ws, w.wc)
        s, t = carry_save_add(w.ws, w.wc, d)
        _, zwd = sign_zero_lookahead(s, t)
        rem_zero = np.where(neg, zwd, zw)
        mism = (neg != full_neg) | (rem_zero != full_zero)
    else:
        neg, rem_zero = full_neg, full_zero

    if cfg.variant.on_the_fly:
        q = otf_finalize(otf, neg)
    else:
        q = (qpos - qneg - neg.astype(U64)) & qmask

    lq = cfg.quotient_frac_bits
    range_err = ((q >> U64(lq + 1)) != 0) | (q < U64(1 << (lq - 1)))
    norm = q < U64(1 << lq)
    qn = np.where(norm, q << U64(1), q)
    frac = qn & umask(lq)
    sf = scale.combine(lanes.dx.k, lanes.dx.e) - scale.combine(lanes.dd.k, lanes.dd.e)
    kq, eq = scale.subtract_split(sf, 0, norm.astype(np.int64))
    sign = lanes.dx.sign ^ lanes.dd.sign
    out = encode_round_array(sign, kq, eq, frac, lq, ~rem_zero, n)
    out = np.where(lanes.nar, U64(1 << (n - 1)), np.where(lanes.zero, U64(0), out))

    if recorder is not None:
        k_pre, e_pre = scale.split(sf)
        recorder.finish(
            lanes=lanes,
            w=w,
            d=d,
            negative=neg,
            rem_zero=rem_zero,
            normalized=norm,
            quotient=qn,
            k_pre=k_pre,
            e_pre=e_pre,
            k=kq,
            e=eq,
            out=out,
        )
    special = lanes.nar | lanes.zero
    return BatchResult(
        bits=out,
        bound_violations=viol & ~special,
        selection_errors=selerr & ~special,
        flag_mismatches=mism,
        range_errors=range_err & ~special,
    )


def divide_batch(xbits, dbits, cfg: DivisionConfig, check: bool = True, chunk: int = CHUNK) -> BatchResult:
    """Divide pattern arrays lane by lane; invariant flags are per lane."""
    xb = np.asarray(xbits, dtype=U64)
    db = np.asarray(dbits, dtype=U64)
    if xb.shape != db.shape:
        raise ValueError("operand arrays differ in shape")
    parts = [_run(cfg, xb[i : i + chunk], db[i : i + chunk], check) for i in range(0, len(xb), chunk)]
    if not parts:
        e = np.zeros(0, dtype=bool)
        return BatchResult(np.zeros(0, dtype=U64), e, e, e, e)
    return BatchResult(*(np.concatenate([getattr(p, f) for p in parts]) for f in BatchResult.__dataclass_fields__))


# ---------------------------------------------------------------------------
# Single division with trace


def decimal_string(v: Fraction) -> str:
    """Exact decimal expansion of a dyadic rational."""
    if v.denominator & (v.denominator - 1):
        raise ValueError(f"{v} is not dyadic")
    sign = "-" if v < 0 else ""
    v = abs(v)
    k = v.denominator.bit_length() - 1
    digits = v.numerator * 5**k
    whole, part = divmod(digits, 10**k)
    if not k:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{part:0{k}d}".rstrip("0").rstrip(".")


@dataclass
class TraceRow:
    iter: int
    y_hat: str
    digit: int
    ws_hex: str
    wc_hex: str | None
    Q_bits: str
    QD_bits: str | None


@dataclass
class DivisionTrace:
    config: str
    width: int
    iterations: int
    cycles: int
    residual_width: int
    residual_frac_bits: int
    rows: list[TraceRow] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    scale_factor: str | None = None
    k_pre: int = 0
    e_pre: int = 0
    k: int = 0
    e: int = 0
    quotient: str = ""
    result: str = ""

    def header(self) -> dict:
        return {
            "record": "header",
            "config": self.config,
            "n": self.width,
            "It": self.iterations,
            "cycles": self.cycles,
            "residual_width": self.residual_width,
            "residual_frac_bits": self.residual_frac_bits,
            "scale_factor": self.scale_factor,
        }

    def footer(self) -> dict:
        return {
            "record": "footer",
            "flags": self.flags,
            "k_pre": self.k_pre,
            "e_pre": self.e_pre,
            "k": self.k,
            "e": self.e,
            "quotient": self.quotient,
            "result": self.result,
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header())]
        lines += [json.dumps({"record": "iter", **asdict(row)}) for row in self.rows]
        lines.append(json.dumps(self.footer()))
        return "\n".join(lines) + "\n"


def _hex(v: int, width: int) -> str:
    return f"0x{v:0{(width + 3) // 4}x}"


class _Recorder:
    def __init__(self, cfg: DivisionConfig, trace: DivisionTrace):
        self.cfg = cfg
        self.trace = trace
        self.digits: list[int] = []
        self.final: dict = {}

    def row(self, i, w_prev: Residual, codes, digits, w: Residual, q_reg, qd_reg):
        cfg = self.cfg
        if codes is None:
            y = w_prev.values()[0]
        else:
            y = code_value(codes[0], INT_BITS, cfg.estimate_bits)
        width = w.fmt.width
        bits = i * cfg.log2r
        q = int(q_reg[0])
        self.digits.append(int(digits[0]))
        self.trace.rows.append(
            TraceRow(
                iter=i,
                y_hat=decimal_string(y),
                digit=int(digits[0]),
                ws_hex=_hex(w.ws.to_ints()[0], width),
                wc_hex=None if w.wc is None else _hex(w.wc.to_ints()[0], width),
                Q_bits=format(q, f"0{bits}b"),
                QD_bits=None if qd_reg is None else format(int(qd_reg[0]), f"0{bits}b"),
            )
        )

    def finish(self, **kw):
        self.final = kw


def divide(x: PositWord, d: PositWord, cfg: DivisionConfig) -> tuple[PositWord, DivisionTrace]:
    """One division with a full trace; raises on any invariant breach."""
    n = cfg.width
    if x.width != n or d.width != n:
        raise ValueError(f"operands are {x.width}/{d.width} bits, configuration expects {n}")
    fmt = cfg.residual_format
    trace = DivisionTrace(
        config=cfg.name,
        width=n,
        iterations=cfg.iterations,
        cycles=cfg.latency,
        residual_width=fmt.width,
        residual_frac_bits=fmt.frac_bits,
    )
    rec = _Recorder(cfg, trace)
    res = _run(cfg, np.array([x.bits], dtype=U64), np.array([d.bits], dtype=U64), True, rec)
    f = rec.final
    lanes = f["lanes"]
    special = bool(lanes.nar[0] | lanes.zero[0])
    if lanes.scale_index is not None:
        trace.scale_factor = SCALE_TABLE[int(lanes.scale_index[0])].components()

    if res.bound_violations[0]:
        raise ConvergenceError([0])
    if res.selection_errors[0]:
        raise qds.SelectionError("estimate left the selection function's domain")
    if res.flag_mismatches[0]:
        raise InvariantError("lookahead sign/zero flags disagree with full assimilation")
    if res.range_errors[0]:
        raise InvariantError("converted quotient outside [1/2, 2)")

    # x/2^p = d * sum(q_j r^-j) + w(It) * r^-It, checked exactly
    g = cfg.significand_bits
    xv = Fraction(int(lanes.xs[0]), 1 << g)
    dv = Fraction(int(lanes.ds[0]), 1 << g)
    q_sum = sum((Fraction(q, cfg.radix**j) for j, q in enumerate(rec.digits, 1)), Fraction(0))
    w_end = f["w"].values()[0]
    if xv / (1 << redundancy_shift(cfg.rho)) != dv * q_sum + w_end / Fraction(cfg.radix) ** cfg.iterations:
        raise InvariantError("recurrence does not reconstruct the dividend")

    lq = cfg.quotient_frac_bits
    qn = int(f["quotient"][0])
    trace.flags = {
        "special": special,
        "remainder_negative": bool(f["negative"][0]),
        "remainder_zero": bool(f["rem_zero"][0]),
        "normalized": bool(f["normalized"][0]),
    }
    trace.k_pre, trace.e_pre = int(f["k_pre"][0]), int(f["e_pre"][0])
    trace.k, trace.e = int(f["k"][0]), int(f["e"][0])
    trace.quotient = f"{qn >> lq}." + format(qn & ((1 << lq) - 1), f"0{lq}b")
    out = PositWord(int(res.bits[0]), n)
    trace.result = out.binary()
    return out, trace
