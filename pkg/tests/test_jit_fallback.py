"""The pure-Python kernel path must agree with the compiled one."""

import json
import os
import subprocess
import sys

from gridplan._jit import JIT_ENABLED

PROBE = r"""
import json
from fractions import Fraction
import numpy as np
from gridplan._jit import JIT_ENABLED
from gridplan.compliance import check_compliance, is_radial_by_count
from gridplan.generator import GenConfig, generate_grid, generate_instance
from gridplan.instance_io import serialize_plan
from gridplan.planner import SolveConfig, solve

out = {"jit": JIT_ENABLED, "plans": [], "checks": []}
for n, alpha, seed in [(6, Fraction(1, 5), 0), (8, Fraction(3, 5), 1), (8, Fraction(1), 2)]:
    gi = generate_instance(GenConfig(n, 2, alpha, seed))
    for mode in ("sequential", "parallel"):
        res = solve(gi.instance, SolveConfig(mode=mode))
        out["plans"].append([res.outcome.value, serialize_plan(res.plan), res.stats.windows])
rng = np.random.default_rng(9)
for _ in range(30):
    g = generate_grid(GenConfig(int(rng.integers(4, 16))), rng)
    rep = check_compliance(g)
    out["checks"].append([rep.compliant, is_radial_by_count(g), [v.code for v in rep.violations]])
print(json.dumps(out))
"""


def _probe(no_jit):
    env = dict(os.environ)
    env.pop("GRIDPLAN_NO_JIT", None)
    if no_jit:
        env["GRIDPLAN_NO_JIT"] = "1"
    proc = subprocess.run([sys.executable, "-c", PROBE], capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


def test_fallback_matches_compiled():
    slow = _probe(no_jit=True)
    fast = _probe(no_jit=False)
    assert slow["jit"] is False
    assert fast["jit"] is JIT_ENABLED
    assert slow["plans"] == fast["plans"]
    assert slow["checks"] == fast["checks"]


def test_flag_values():
    env = dict(os.environ, GRIDPLAN_NO_JIT="0")
    code = "from gridplan._jit import DISABLED; print(DISABLED)"
    assert subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True).stdout.strip() == "False"
    env["GRIDPLAN_NO_JIT"] = "yes"
    assert subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True).stdout.strip() == "True"
