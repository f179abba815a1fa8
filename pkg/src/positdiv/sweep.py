"""Differential sweeps: every configuration against the rational oracle.

The oracle result for a pair is computed once and shared by all
configurations. Work can be sharded over processes (``workers``); shards
are merged back in operand order, so reports do not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import DivisionConfig, all_configs, divide_batch
from .lanes import U64
from .oracle import divide_bits

WORKERS_ENV = "POSITDIV_WORKERS"
EXHAUSTIVE_MAX_WIDTH = 12
MISMATCH_LIMIT = 20


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def edge_patterns(n: int) -> list[int]:
    """Zero, NaR, +-maxpos, +-minpos, +-1, regime extremes and all-ones fractions."""
    mask = (1 << n) - 1
    pos = {1, (1 << (n - 1)) - 1, 1 << (n - 2)}
    # longest regimes, so that few or no fraction bits remain
    for run in range(max(n - 5, 1), n - 1):
        ones = ((1 << run) - 1) << (n - 1 - run)
        rest = n - 2 - run
        for tail in range(1 << rest):
            pos.add(ones | tail)
            pos.add((1 << rest) | tail)
    # all-ones fraction for a few regimes and every exponent
    for k in (-3, -1, 0, 1, 3):
        if k >= 0:
            rl, regime = k + 2, ((1 << (k + 1)) - 1) << 1
        else:
            rl, regime = 1 - k, 1
        avail = n - 1 - rl
        if avail < 2:
            continue
        for e in range(4):
            pos.add((regime << avail) | (e << (avail - 2)) | ((1 << (avail - 2)) - 1))
    pos = {p for p in pos if 0 < p < (1 << (n - 1))}
    out = {0, 1 << (n - 1)} | pos | {(-p) & mask for p in pos}
    return sorted(out)


def exhaustive_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n > EXHAUSTIVE_MAX_WIDTH:
        raise ValueError(f"exhaustive sweeps are limited to n <= {EXHAUSTIVE_MAX_WIDTH}")
    v = np.arange(1 << n, dtype=U64)
    return np.repeat(v, 1 << n), np.tile(v, 1 << n)


def random_pairs(n: int, count: int, seed: int = 0, edges: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """``count`` uniform random pairs; edge cases replace a prefix of them."""
    rng = np.random.default_rng(seed)
    x = rng.integers(0, np.iinfo(np.uint64).max, count, dtype=U64, endpoint=True)
    d = rng.integers(0, np.iinfo(np.uint64).max, count, dtype=U64, endpoint=True)
    if n < 64:
        x &= U64((1 << n) - 1)
        d &= U64((1 << n) - 1)
    if edges:
        e = np.array(edge_patterns(n), dtype=U64)
        ex, ed = np.repeat(e, len(e)), np.tile(e, len(e))
        # each edge pattern also meets random partners on both sides
        m = len(e) * 8
        rx = np.concatenate([np.tile(e, 8), x[:m]])
        rd = np.concatenate([d[:m], np.tile(e, 8)])
        inj_x = np.concatenate([ex, rx])[:count]
        inj_d = np.concatenate([ed, rd])[:count]
        x[: len(inj_x)] = inj_x
        d[: len(inj_d)] = inj_d
    return x, d


def oracle_batch(x: np.ndarray, d: np.ndarray, n: int) -> np.ndarray:
    return np.fromiter((divide_bits(int(a), int(b), n) for a, b in zip(x, d)), dtype=U64, count=len(x))


@dataclass
class ConfigStats:
    config: str
    iterations: int
    latency: int
    cases: int = 0
    mismatches: int = 0
    bound_violations: int = 0
    selection_errors: int = 0
    flag_mismatches: int = 0
    range_errors: int = 0

    @property
    def violations(self) -> int:
        return self.bound_violations + self.selection_errors + self.flag_mismatches + self.range_errors


@dataclass
class SweepReport:
    width: int
    total: int = 0
    configs: dict[str, ConfigStats] = field(default_factory=dict)
    # (x, d, config, got, want), sorted by operand pair
    mismatches: list[tuple[int, int, str, int, int]] = field(default_factory=list)

    @property
    def mismatch_count(self) -> int:
        return sum(s.mismatches for s in self.configs.values())

    @property
    def violation_count(self) -> int:
        return sum(s.violations for s in self.configs.values())

    @property
    def ok(self) -> bool:
        return self.mismatch_count == 0 and self.violation_count == 0

    def merge(self, other: SweepReport) -> None:
        self.total += other.total
        for name, s in other.configs.items():
            mine = self.configs.setdefault(name, ConfigStats(name, s.iterations, s.latency))
            for f in ("cases", "mismatches", "bound_violations", "selection_errors", "flag_mismatches", "range_errors"):
                setattr(mine, f, getattr(mine, f) + getattr(s, f))
        self.mismatches = sorted(self.mismatches + other.mismatches)[:MISMATCH_LIMIT]

    def as_dict(self) -> dict:
        return {
            "n": self.width,
            "total": self.total,
            "mismatches": self.mismatch_count,
            "violations": self.violation_count,
            "configs": [vars(s) for s in self.configs.values()],
            "examples": [
                {"x": f"{x:#x}", "d": f"{d:#x}", "config": c, "got": f"{g:#x}", "want": f"{w:#x}"}
                for x, d, c, g, w in self.mismatches
            ],
        }


def check_shard(x: np.ndarray, d: np.ndarray, n: int, configs: list[DivisionConfig]) -> SweepReport:
    want = oracle_batch(x, d, n)
    rep = SweepReport(n, total=len(x))
    for cfg in configs:
        res = divide_batch(x, d, cfg)
        bad = np.flatnonzero(res.bits != want)
        counts = res.counts()
        rep.configs[cfg.name] = ConfigStats(cfg.name, cfg.iterations, cfg.latency, len(x), len(bad), **counts)
        for i in bad[:MISMATCH_LIMIT]:
            rep.mismatches.append((int(x[i]), int(d[i]), cfg.name, int(res.bits[i]), int(want[i])))
    rep.mismatches = sorted(rep.mismatches)[:MISMATCH_LIMIT]
    return rep


def run_sweep(
    x: np.ndarray,
    d: np.ndarray,
    n: int,
    configs: list[DivisionConfig] | None = None,
    workers: int | None = None,
    shard: int = 1 << 17,
) -> SweepReport:
    configs = configs or all_configs(n)
    workers = workers or default_workers()
    spans = [(i, min(i + shard, len(x))) for i in range(0, len(x), shard)]
    report = SweepReport(n)
    for c in configs:
        report.configs[c.name] = ConfigStats(c.name, c.iterations, c.latency)
    if workers == 1 or len(spans) == 1:
        parts = (check_shard(x[a:b], d[a:b], n, configs) for a, b in spans)
        for p in parts:
            report.merge(p)
        return report
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(check_shard, x[a:b], d[a:b], n, configs) for a, b in spans]
        for f in futures:
            report.merge(f.result())
    return report
