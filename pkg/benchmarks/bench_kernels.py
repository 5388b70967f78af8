"""Compiled vs pure-Python kernel timings.

Each arm runs in its own interpreter because GRIDPLAN_NO_JIT is read at import.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
from fractions import Fraction
import numpy as np
from gridplan._jit import JIT_ENABLED
from gridplan.compliance import is_compliant, is_radial, is_radial_by_count
from gridplan.generator import GenConfig, generate_grid, generate_instance
from gridplan.planner import SolveConfig, solve

rng = np.random.default_rng(0)
grids = [generate_grid(GenConfig(n), rng) for n in (8, 15, 30, 50) for _ in range(50)]
arrays = [g.arrays for g in grids]
insts = [generate_instance(GenConfig(n, 2, Fraction(1), s)).instance for n in (8, 12) for s in range(3)]

# warm up (compilation or cache load is not what we measure)
is_compliant(grids[0]); solve(insts[0], SolveConfig())

out = {"jit": JIT_ENABLED}
t = time.perf_counter()
for _ in range(REPEAT):
    for g in grids:
        is_radial(g); is_radial_by_count(g); is_compliant(g)
out["compliance"] = (time.perf_counter() - t) / REPEAT
t = time.perf_counter()
for _ in range(REPEAT):
    for inst in insts:
        solve(inst, SolveConfig())
out["solve"] = (time.perf_counter() - t) / REPEAT
print(json.dumps(out))
"""


def run_arm(no_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("GRIDPLAN_NO_JIT", None)
    if no_jit:
        env["GRIDPLAN_NO_JIT"] = "1"
    code = WORKLOAD.replace("REPEAT", str(repeat))
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    fast = run_arm(False, args.repeat)
    slow = run_arm(True, args.repeat)
    if args.json:
        print(json.dumps({"jit": fast, "python": slow}))
        return
    if not fast["jit"]:
        print("numba unavailable: both arms ran the Python kernels")
    print(f"{'workload':<12}{'jit s':>10}{'python s':>12}{'speedup':>10}")
    for key in ("compliance", "solve"):
        print(f"{key:<12}{fast[key]:>10.3f}{slow[key]:>12.3f}{slow[key] / fast[key]:>9.1f}x")


if __name__ == "__main__":
    main()
