"""Independent plan validation and a brute-force optimality oracle.

Both replay plans on ``PowerGrid`` values with the grid module's transition
functions; neither touches the planner's array encoding or step enumerator.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from .compliance import check_compliance, is_compliant
from .grid import (
    Add,
    EdgeState,
    Plan,
    PowerGrid,
    Remove,
    Switch,
    affected_edges,
    applicability,
    apply_action_set,
    sorted_actions,
)
from .instance_io import Instance

NOT_APPLICABLE = "NOT_APPLICABLE"
INTERFERENCE = "INTERFERENCE"
NOT_BUILDABLE = "NOT_BUILDABLE"
NOT_REMOVABLE = "NOT_REMOVABLE"
REVERSED_EDIT = "REVERSED_EDIT"
NONCOMPLIANT_STATE = "NONCOMPLIANT_STATE"
FINAL_MISMATCH = "FINAL_MISMATCH"
EMPTY_STEP = "EMPTY_STEP"
NOT_SEQUENTIAL = "NOT_SEQUENTIAL"


class CapExceeded(Exception):
    pass


@dataclass(frozen=True)
class Failure:
    step: int
    code: str
    detail: str


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    @property
    def codes(self) -> set:
        return {f.code for f in self.failures}

    def to_dict(self) -> dict:
        return {"valid": self.valid, "failures": [vars(f) for f in self.failures]}

    def __str__(self):
        if self.valid:
            return "valid"
        return "invalid\n" + "\n".join(f"step {f.step}: {f.code} {f.detail}" for f in self.failures)


def _mode_name(mode) -> str:
    return getattr(mode, "value", mode)


def validate_plan(inst: Instance, plan: Plan, mode="parallel") -> ValidationReport:
    """Replay ``plan`` from the start grid and collect every rule violation.

    Replay stops at the first step that cannot be executed; earlier findings
    are kept. Compliance is checked on every grid including the first and last.
    """
    sequential = _mode_name(mode) == "sequential"
    report = ValidationReport()
    fail = report.failures
    g = inst.start
    rep = check_compliance(g)
    if not rep.compliant:
        fail.append(Failure(0, NONCOMPLIANT_STATE, "start grid: " + ", ".join(v.code for v in rep.violations)))
    added, removed = {}, {}
    for i, step in enumerate(plan.steps):
        if not step:
            fail.append(Failure(i, EMPTY_STEP, "no actions"))
            continue
        if sequential and len(step) != 1:
            fail.append(Failure(i, NOT_SEQUENTIAL, f"{len(step)} actions in a sequential plan"))
        acts = sorted_actions(step)
        blocked = False
        for a1, a2 in itertools.combinations(acts, 2):
            if not affected_edges(a1).isdisjoint(affected_edges(a2)):
                fail.append(Failure(i, INTERFERENCE, f"{a1} and {a2}"))
                blocked = True
        for a in acts:
            if isinstance(a, Add):
                if a.edge not in inst.buildable:
                    fail.append(Failure(i, NOT_BUILDABLE, str(a)))
                added.setdefault(a.edge, i)
                if a.edge in removed:
                    fail.append(Failure(i, REVERSED_EDIT, f"{a} after remove at step {removed[a.edge]}"))
            elif isinstance(a, Remove):
                if a.edge not in inst.removable:
                    fail.append(Failure(i, NOT_REMOVABLE, str(a)))
                removed.setdefault(a.edge, i)
                if a.edge in added:
                    fail.append(Failure(i, REVERSED_EDIT, f"{a} after add at step {added[a.edge]}"))
            reason = applicability(g, a)
            if reason is not None:
                fail.append(Failure(i, NOT_APPLICABLE, f"{a}: {reason}"))
                blocked = True
        if blocked:
            return report
        g = apply_action_set(g, acts)
        rep = check_compliance(g)
        if not rep.compliant:
            codes = ", ".join(f"{v.code}({v.subject})" for v in rep.violations)
            fail.append(Failure(i, NONCOMPLIANT_STATE, f"grid after step {i}: {codes}"))
    mismatch = []
    for e, s in inst.target.edges.items():
        got = g.edges.get(e)
        if got is not s:
            mismatch.append(f"{e} is {got.value if got else 'absent'}, target {s.value}")
    for e in g.edges:
        if e not in inst.target.edges:
            mismatch.append(f"{e} present but not in target")
    if mismatch:
        fail.append(Failure(len(plan), FINAL_MISMATCH, "; ".join(mismatch)))
    return report


# -- oracle --------------------------------------------------------------------


def _successor_actions(g: PowerGrid, inst: Instance) -> list:
    acts = [Add(e) for e in sorted(inst.buildable) if e not in g.edges]
    acts += [Remove(e) for e in sorted(inst.removable) if g.edges.get(e) is EdgeState.OPEN]
    for x in g.secondaries:
        inc = g.incident(x)
        for ec in inc:
            if g.edges[ec] is not EdgeState.CLOSE:
                continue
            for eo in inc:
                if g.edges[eo] is EdgeState.OPEN:
                    acts.append(Switch(x, ec.other(x), eo.other(x)))
    return acts


def _compatible_subsets(acts):
    """All nonempty pairwise non-interfering subsets, via include/exclude recursion."""
    out = []

    def rec(i, chosen, used):
        if i == len(acts):
            if chosen:
                out.append(tuple(chosen))
            return
        rec(i + 1, chosen, used)
        aff = affected_edges(acts[i])
        if used.isdisjoint(aff):
            chosen.append(acts[i])
            rec(i + 1, chosen, used | aff)
            chosen.pop()

    rec(0, [], frozenset())
    return out


def oracle_shortest(inst: Instance, mode="parallel", length_cap: int = 6, state_budget: int = 200_000):
    """Uniform-cost search for the (switches, steps)-cheapest plan of at most ``length_cap`` steps.

    Returns ``(plan, cost)`` or None. Raises CapExceeded once more than
    ``state_budget`` successor grids have been generated.
    """
    if inst.start == inst.target:
        return Plan(()), (0, 0)
    sequential = _mode_name(mode) == "sequential"
    target = inst.target
    tie = itertools.count()
    frontier = [(0, 0, next(tie), inst.start, None)]
    labels = {inst.start: [(0, 0)]}
    generated = 0
    compliant_cache = {}
    while frontier:
        sw, steps, _, g, back = heapq.heappop(frontier)
        if steps > 0 and g == target:
            out = []
            while back is not None:
                step, back = back
                out.append(step)
            plan = Plan(tuple(frozenset(s) for s in reversed(out)))
            return plan, (sw, steps)
        if steps == length_cap:
            continue
        acts = _successor_actions(g, inst)
        sets = [(a,) for a in acts] if sequential else _compatible_subsets(acts)
        for step in sets:
            generated += 1
            if generated > state_budget:
                raise CapExceeded(f"more than {state_budget} successors generated")
            nxt = apply_action_set(g, step)
            ok = compliant_cache.get(nxt)
            if ok is None:
                ok = compliant_cache[nxt] = is_compliant(nxt)
            if not ok:
                continue
            cost = (sw + sum(isinstance(a, Switch) for a in step), steps + 1)
            seen = labels.setdefault(nxt, [])
            if any(s0 <= cost[0] and t0 <= cost[1] for s0, t0 in seen):
                continue
            seen.append(cost)
            heapq.heappush(frontier, (cost[0], cost[1], next(tie), nxt, (step, back)))
    return None
