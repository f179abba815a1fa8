"""Command-line front end.

    positdiv div --n 10 --x 0011010111 --d 0001001100 --variant srt-cs-of --radix 2
    positdiv sweep --n 8 --exhaustive --all-variants
    positdiv sweep --n 32 --random 1000000
    positdiv cycles --n 16 32 64
    positdiv table

A ``--config FILE`` of ``key = value`` lines may preset variant, radix,
scaled, n, seed and workers; command-line flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import qds
from .codec import PatternError, PositWord
from .engine import DivisionConfig, Variant, all_configs, divide
from .oracle import value
from .sweep import EXHAUSTIVE_MAX_WIDTH, default_workers, exhaustive_pairs, random_pairs, run_sweep

CONFIG_KEYS = {"variant", "radix", "scaled", "n", "seed", "workers"}


def load_config_file(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip().lower(), val.strip()
        if not sep or key not in CONFIG_KEYS:
            raise SystemExit(f"{path}:{lineno}: expected one of {sorted(CONFIG_KEYS)} as key = value")
        if key == "scaled":
            out[key] = val.lower() in ("1", "true", "yes", "on")
        elif key == "variant":
            out[key] = val
        else:
            out[key] = int(val)
    return out


def _config(args, n: int) -> DivisionConfig:
    try:
        return DivisionConfig(Variant(args.variant), args.radix, args.scaled, n)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}") from None


def _value_str(bits: int, n: int) -> str:
    v = value(bits, n)
    if v is None:
        return "NaR"
    return str(v) if v.denominator == 1 else f"{v} (~{float(v):.17g})"


def cmd_div(args) -> int:
    n = args.n
    try:
        x = PositWord.parse(args.x, n)
        d = PositWord.parse(args.d, n)
    except (PatternError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cfg = _config(args, n)
    q, trace = divide(x, d, cfg)
    if args.trace:
        sys.stdout.write(trace.to_jsonl())
        return 0
    if args.json:
        print(json.dumps({"config": cfg.name, "x": x.binary(), "d": d.binary(), "q": q.binary(), "hex": q.hex(), "value": _value_str(q.bits, n)}))
        return 0
    print(q.binary())
    print(f"hex    {q.hex()}")
    print(f"value  {_value_str(q.bits, n)}")
    print(f"config {cfg.name}, {cfg.iterations} iterations, {cfg.latency} cycles")
    return 0


def _sweep_configs(args, n: int) -> list[DivisionConfig]:
    if args.all_variants or args.variant is None:
        return all_configs(n)
    return [_config(args, n)]


def cmd_sweep(args) -> int:
    n = args.n
    if args.exhaustive:
        if n > EXHAUSTIVE_MAX_WIDTH:
            print(f"error: exhaustive sweeps need n <= {EXHAUSTIVE_MAX_WIDTH}", file=sys.stderr)
            return 2
        x, d = exhaustive_pairs(n)
    else:
        x, d = random_pairs(n, args.random, seed=args.seed)
    configs = _sweep_configs(args, n)
    rep = run_sweep(x, d, n, configs, workers=args.workers or default_workers())
    if args.json:
        print(json.dumps(rep.as_dict()))
    else:
        print(f"n={n}  pairs={rep.total}  mismatches={rep.mismatch_count}  violations={rep.violation_count}")
        print(f"{'config':<18}{'It':>4}{'cycles':>8}{'cases':>12}{'mismatch':>10}{'violations':>12}")
        for s in rep.configs.values():
            print(f"{s.config:<18}{s.iterations:>4}{s.latency:>8}{s.cases:>12}{s.mismatches:>10}{s.violations:>12}")
        for x0, d0, c, got, want in rep.mismatches:
            print(f"MISMATCH {c}: x={x0:#x} d={d0:#x} got={got:#x} want={want:#x}")
    return 0 if rep.ok else 1


def cmd_cycles(args) -> int:
    rows = []
    for n in args.n:
        for cfg in all_configs(n):
            if args.variant and cfg.variant.value != args.variant:
                continue
            rows.append({"n": n, "config": cfg.name, "radix": cfg.radix, "scaled": cfg.scaled, "It": cfg.iterations, "cycles": cfg.latency})
    if args.json:
        for r in rows:
            print(json.dumps(r))
        return 0
    print(f"{'n':>3}  {'config':<18}{'It':>4}{'cycles':>8}")
    for r in rows:
        print(f"{r['n']:>3}  {r['config']:<18}{r['It']:>4}{r['cycles']:>8}")
    print()
    for n in args.n:
        parts = []
        for radix, scaled, label in ((2, False, "radix-2"), (4, False, "radix-4"), (4, True, "radix-4 scaled")):
            cfg = DivisionConfig(Variant.SRT_CS_OF_FR, radix, scaled, n)
            parts.append(f"{label}: {cfg.iterations}/{cfg.latency}")
        print(f"n={n}  " + "  ".join(parts))
    return 0


def cmd_table(args) -> int:
    table = qds.load_r4_table()
    if args.check:
        fresh = qds.build_r4_table()
        cells = qds.verify_r4_table(table)
        same = fresh == table
        print(f"containment: {cells} reachable cells verified")
        print(f"rebuild matches frozen table: {same}")
        print(f"sha256: {table.sha256()}")
        return 0 if same else 1
    if args.thresholds:
        for j, m in enumerate(table.thresholds()):
            d_lo = qds.r4_divisor_ranges()[j][0]
            print(f"d_hat={d_lo}: " + "  ".join(f"m{k}={v}" for k, v in m.items()))
        return 0
    sys.stdout.write(table.serialize())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="positdiv", description="Digit-recurrence posit<n,2> division model")
    p.add_argument("--config", help="key = value file presetting variant, radix, scaled, n, seed, workers")
    sub = p.add_subparsers(dest="command", required=True)

    def variant_flags(sp, default_variant):
        sp.add_argument("--variant", choices=[v.value for v in Variant], default=default_variant)
        sp.add_argument("--radix", type=int, choices=(2, 4), default=None)
        sp.add_argument("--scaled", action="store_true", default=None)

    sp = sub.add_parser("div", help="divide two patterns")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--x", required=True, help="dividend pattern (binary, 0x hex, 0b binary or decimal)")
    sp.add_argument("--d", required=True, help="divisor pattern")
    variant_flags(sp, None)
    sp.add_argument("--trace", action="store_true", help="emit the JSON-lines trace")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_div)

    sp = sub.add_parser("sweep", help="differential sweep against the oracle")
    sp.add_argument("--n", type=int, default=None)
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--random", type=int, metavar="COUNT")
    variant_flags(sp, None)
    sp.add_argument("--all-variants", action="store_true")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("cycles", help="iterations and latency per configuration")
    sp.add_argument("--n", type=int, nargs="+", default=[16, 32, 64])
    sp.add_argument("--variant", choices=[v.value for v in Variant], default=None)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_cycles)

    sp = sub.add_parser("table", help="dump the radix-4 selection table")
    sp.add_argument("--check", action="store_true", help="re-derive, verify and hash the table")
    sp.add_argument("--thresholds", action="store_true", help="print m_k per divisor interval")
    sp.set_defaults(func=cmd_table)
    return p


def _apply_presets(args) -> None:
    preset = load_config_file(args.config) if args.config else {}
    defaults = {"variant": None, "radix": 2, "scaled": False, "n": 16, "seed": 0, "workers": None}
    if args.command == "div":
        defaults["variant"] = Variant.SRT_CS_OF_FR.value
    for key, default in defaults.items():
        if not hasattr(args, key) or key == "n" and isinstance(args.n, list):
            continue
        if getattr(args, key) is None:
            setattr(args, key, preset.get(key, default))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_presets(args)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
