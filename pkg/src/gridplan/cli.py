"""``gridplan`` command line: solve, validate, check, generate, export, bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .compliance import check_compliance
from .generator import GenConfig, GenerationFailed, generate_instance
from .grid import GridError
from .instance_io import (
    ComplianceError,
    NodeSetMismatch,
    ParseError,
    export_dot,
    parse_grid,
    parse_instance,
    parse_plan,
    read_meta,
    serialize_instance,
    serialize_plan,
)
from .planner import Mode, Objective, Outcome, SolveConfig, solve, solve_bounded
from .verify import validate_plan

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RESOURCE = 4
EXIT_INTERNAL = 5

STRATEGIES = ("exponential", "bounded@0.5g", "bounded@g", "bounded@2g")
_BETA = {"bounded@0.5g": Fraction(1, 2), "bounded@g": Fraction(1), "bounded@2g": Fraction(2)}
CSV_COLUMNS = ("instance", "size", "mode", "strategy", "solved", "cost_switches", "cost_length", "seconds")

log = logging.getLogger("gridplan")


class InputError(Exception):
    pass


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_instance(path):
    text = _read(path)
    try:
        return parse_instance(text), read_meta(text)
    except (ParseError, NodeSetMismatch, ComplianceError, GridError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _byte_size(s: str) -> int:
    units = {"k": 2**10, "m": 2**20, "g": 2**30, "kib": 2**10, "mib": 2**20, "gib": 2**30}
    s = s.strip().lower()
    for suffix in sorted(units, key=len, reverse=True):
        if s.endswith(suffix):
            return int(float(s[: -len(suffix)]) * units[suffix])
    return int(s)


def _alpha(s: str) -> Fraction:
    try:
        a = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad alpha {s!r}") from exc
    if a <= 0:
        raise argparse.ArgumentTypeError("alpha must be positive")
    return a


def _seed_default() -> int:
    return int(os.environ.get("GRIDPLAN_SEED", "0"))


# -- solve ---------------------------------------------------------------------


def cmd_solve(args) -> int:
    inst, _ = _load_instance(args.instance)
    cfg = SolveConfig(
        mode=args.mode,
        objective=args.objective,
        max_horizon=args.max_horizon,
        time_limit=args.timeout,
        memory_limit=args.mem_limit,
        strict_nonempty=args.strict_nonempty,
        window_only=args.window_only,
        seed=args.seed,
    )
    res = solve(inst, cfg)
    if args.stats == "json":
        print(json.dumps(res.to_dict(), sort_keys=True), file=sys.stderr)
    if res.plan is not None:
        report = validate_plan(inst, res.plan, cfg.mode)
        if not report.valid:
            print(f"internal error: emitted plan fails validation\n{report}", file=sys.stderr)
            return EXIT_INTERNAL
    if res.outcome is Outcome.SOLVED:
        header = None if res.proven_optimal or cfg.objective is Objective.SATISFICING else "incomplete"
        _emit(serialize_plan(res.plan, header=header), args.out)
        return EXIT_OK
    if res.outcome is Outcome.UNSAT:
        print(f"{Outcome.UNSAT.value} (max horizon {cfg.max_horizon})", file=sys.stderr)
        return EXIT_NEGATIVE
    print(f"{Outcome.RESOURCE.value}: {res.stats.limit}", file=sys.stderr)
    if res.plan is not None:
        _emit(serialize_plan(res.plan, header="incomplete"), args.out)
    return EXIT_RESOURCE


# -- validate / check / export -------------------------------------------------


def cmd_validate(args) -> int:
    inst, _ = _load_instance(args.instance)
    try:
        plan = parse_plan(_read(args.plan))
    except ParseError as exc:
        raise InputError(f"{args.plan}: {exc}") from exc
    report = validate_plan(inst, plan, args.mode)
    print(json.dumps(report.to_dict(), sort_keys=True) if args.json else report)
    return EXIT_OK if report.valid else EXIT_NEGATIVE


def _load_grid(path):
    try:
        return parse_grid(_read(path))
    except (ParseError, GridError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_check(args) -> int:
    report = check_compliance(_load_grid(args.grid))
    print(json.dumps(report.to_dict(), sort_keys=True) if args.json else report)
    return EXIT_OK if report.compliant else EXIT_NEGATIVE


def cmd_export(args) -> int:
    text = _read(args.file)
    try:
        if args.which == "grid":
            g = parse_grid(text)
        else:
            inst = parse_instance(text)
            g = inst.start if args.which == "start" else inst.target
    except (ParseError, NodeSetMismatch, ComplianceError, GridError, ValueError) as exc:
        raise InputError(f"{args.file}: {exc}") from exc
    _emit(export_dot(g, args.name), args.out)
    return EXIT_OK


# -- generate ------------------------------------------------------------------


def instance_name(n: int, alpha: Fraction, seed: int) -> str:
    a = f"{float(alpha):g}".replace(".", "p")
    return f"lpp_n{n}_a{a}_s{seed}"


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for n in args.nodes:
        for alpha in args.alpha:
            for i in range(args.count):
                seed = args.seed + i
                try:
                    gi = generate_instance(GenConfig(n, args.primaries, alpha, seed))
                except (ValueError, GenerationFailed) as exc:
                    print(f"n={n} alpha={alpha} seed={seed}: {exc}", file=sys.stderr)
                    return EXIT_INPUT if isinstance(exc, ValueError) else EXIT_NEGATIVE
                stem = instance_name(n, alpha, seed)
                (out / f"{stem}.lp").write_text(serialize_instance(gi.instance, meta=gi.meta))
                (out / f"{stem}.plan").write_text(serialize_plan(gi.witness, header=f"witness g={gi.g}"))
                written += 1
    print(f"wrote {written} instances to {out}")
    return EXIT_OK


# -- bench ---------------------------------------------------------------------


def _bench_job(job):
    path, mode, strategy, timeout, mem = job
    inst, meta = _load_instance(path)
    cfg = SolveConfig(mode=mode, time_limit=timeout, memory_limit=mem)
    t0 = time.monotonic()
    if strategy == "exponential":
        res = solve(inst, cfg)
    else:
        if "g" not in meta:
            raise InputError(f"{path}: no g in meta line")
        hi = max(1, math.ceil(_BETA[strategy] * int(meta["g"])))
        res = solve_bounded(inst, cfg, 1, hi)
    dt = time.monotonic() - t0
    cost = res.cost if res.solved else (None, None)
    return {
        "instance": Path(path).stem,
        "size": len(inst.nodes),
        "mode": Mode(mode).value,
        "strategy": strategy,
        "solved": int(res.solved),
        "cost_switches": "" if cost[0] is None else cost[0],
        "cost_length": "" if cost[1] is None else cost[1],
        "seconds": f"{dt:.4f}",
    }


def cactus(rows) -> list:
    """(mode, strategy, solved count, seconds) points: i-th fastest solve per cell."""
    cells = {}
    for r in rows:
        if int(r["solved"]):
            cells.setdefault((r["mode"], r["strategy"]), []).append(float(r["seconds"]))
    pts = []
    for (mode, strategy), times in sorted(cells.items()):
        for i, t in enumerate(sorted(times), 1):
            pts.append((mode, strategy, i, f"{t:.4f}"))
    return pts


def cmd_bench(args) -> int:
    files = sorted(Path(args.dir).glob("*.lp"))
    if not files:
        raise InputError(f"no .lp instances in {args.dir}")
    jobs = [(str(f), m, s, args.timeout, args.mem_limit) for f in files for m in args.modes for s in args.strategies]
    if args.jobs <= 1:
        rows = [_bench_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_job, jobs))
    out = Path(args.out or Path(args.dir) / "bench.csv")
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    cactus_path = out.with_name(out.stem + "_cactus.csv")
    with cactus_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("mode", "strategy", "solved", "seconds"))
        w.writerows(cactus(rows))
    print(f"{len(rows)} runs -> {out}, {cactus_path}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridplan", description="Plan compliant power grid transitions.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    modes = [m.value for m in Mode]

    s = sub.add_parser("solve", help="find a plan from start to target")
    s.add_argument("instance")
    s.add_argument("--mode", choices=modes, default="parallel")
    s.add_argument("--objective", choices=[o.value for o in Objective], default="optimal")
    s.add_argument("--max-horizon", type=int, default=256)
    s.add_argument("--timeout", type=float, default=1800.0)
    s.add_argument("--mem-limit", type=_byte_size, default=2 * 2**30)
    s.add_argument("--strict-nonempty", action="store_true")
    s.add_argument("--window-only", action="store_true", help="optimize inside the first solved window only")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out")
    s.add_argument("--stats", choices=("none", "json"), default="none")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="replay a plan against an instance")
    v.add_argument("instance")
    v.add_argument("plan")
    v.add_argument("--mode", choices=modes, default="parallel")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check", help="compliance report for a grid file")
    c.add_argument("grid")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("generate", help="write random instances with witness plans")
    g.add_argument("--nodes", type=int, nargs="+", required=True)
    g.add_argument("--primaries", type=int, default=2)
    g.add_argument("--alpha", type=_alpha, nargs="+", default=[Fraction(1)])
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("export", help="Graphviz DOT for a grid")
    e.add_argument("file")
    e.add_argument("--which", choices=("grid", "start", "target"), default="grid")
    e.add_argument("--name", default="grid")
    e.add_argument("--out")
    e.set_defaults(func=cmd_export)

    b = sub.add_parser("bench", help="solve a directory of instances under several strategies")
    b.add_argument("dir")
    b.add_argument("--modes", nargs="+", choices=modes, default=modes)
    b.add_argument("--strategies", nargs="+", choices=STRATEGIES, default=list(STRATEGIES))
    b.add_argument("--timeout", type=float, default=1800.0)
    b.add_argument("--mem-limit", type=_byte_size, default=2 * 2**30)
    b.add_argument("--jobs", type=int, default=max(1, (os.cpu_count() or 2) // 2))
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if getattr(args, "seed", 0) is None:
        args.seed = _seed_default()
    if getattr(args, "count", 1) < 1 or getattr(args, "max_horizon", 1) < 1:
        print("gridplan: error: counts and horizons must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except InputError as exc:
        print(f"gridplan: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
