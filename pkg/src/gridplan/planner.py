"""Complete bounded search for grid transition plans.

The search is a depth-first branch-and-bound over time steps. A switch
budget bounds the number of switch actions: the admissible switch bound is
half the number of edges that still need an odd number of flips, so every
switch either consumes no slack (it fixes two such edges) or one or two units
of it. Optimal solving raises the budget until a plan exists, then shortens the
plan at that budget. Failed states are memoized per (grid, time, switches).
"""

from __future__ import annotations

import enum
import logging
import resource
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels as K
from .grid import Add, Edge, EdgeState, Plan, PowerGrid, Remove, Switch, plan_cost
from .instance_io import Instance

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


class Objective(str, enum.Enum):
    SATISFICING = "satisficing"
    OPTIMAL = "optimal"


class Outcome(str, enum.Enum):
    SOLVED = "Solved"
    UNSAT = "UnsatWithinHorizon"
    RESOURCE = "ResourceExceeded"


class InvalidWindow(ValueError):
    pass


class _LimitHit(Exception):
    def __init__(self, what: str):
        super().__init__(what)
        self.what = what


@dataclass(frozen=True)
class SolveConfig:
    mode: Mode = Mode.PARALLEL
    objective: Objective = Objective.OPTIMAL
    max_horizon: int = 256
    time_limit: Optional[float] = None
    memory_limit: Optional[int] = None
    node_limit: Optional[int] = None
    strict_nonempty: bool = False
    window_only: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "objective", Objective(self.objective))
        if self.max_horizon < 1:
            raise ValueError("max_horizon must be at least 1")


@dataclass
class SolveStats:
    expanded: int = 0
    generated: int = 0
    wall_time: float = 0.0
    windows: list = field(default_factory=list)
    limit: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "expanded": self.expanded,
            "generated": self.generated,
            "wall_time": round(self.wall_time, 6),
            "windows": [list(w) for w in self.windows],
            "limit": self.limit,
        }


@dataclass
class SolveResult:
    outcome: Outcome
    plan: Optional[Plan] = None
    stats: SolveStats = field(default_factory=SolveStats)
    max_horizon: Optional[int] = None
    proven_optimal: bool = False

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED

    @property
    def cost(self):
        return plan_cost(self.plan) if self.plan is not None else None

    def to_dict(self) -> dict:
        d = {"outcome": self.outcome.value, "stats": self.stats.to_dict()}
        if self.plan is not None:
            d["cost"] = {"switches": self.cost[0], "length": self.cost[1]}
            d["actions"] = self.plan.num_actions
            d["max_step"] = self.plan.max_step_size
        if self.outcome is Outcome.UNSAT:
            d["max_horizon"] = self.max_horizon
        if self.outcome is Outcome.SOLVED:
            d["proven_optimal"] = self.proven_optimal
        return d


class Problem:
    """Array form of an instance over the edge universe start edges + buildable edges."""

    def __init__(self, inst: Instance):
        self.instance = inst
        self.ids = list(inst.start.nodes)
        index = {x: i for i, x in enumerate(self.ids)}
        self.kind = np.array([inst.start.is_primary(x) for x in self.ids], dtype=np.int8)
        self.edges = sorted(set(inst.start.edges) | set(inst.buildable))
        self.eu = np.array([index[e.u] for e in self.edges], dtype=np.int64)
        self.ev = np.array([index[e.v] for e in self.edges], dtype=np.int64)
        self.is_b = np.array([e in inst.buildable for e in self.edges], dtype=np.bool_)
        self.is_r = np.array([e in inst.removable for e in self.edges], dtype=np.bool_)
        self.start = self.encode(inst.start.edges)
        self.target = self.encode(inst.target.edges)
        inc = [[] for _ in self.ids]
        for i, e in enumerate(self.edges):
            inc[index[e.u]].append((index[e.v], i))
            inc[index[e.v]].append((index[e.u], i))
        ptr = [0]
        flat = []
        for lst in inc:
            flat += sorted(lst)
            ptr.append(len(flat))
        self.inc_ptr = np.array(ptr, dtype=np.int64)
        self.inc_other = np.array([o for o, _ in flat], dtype=np.int64)
        self.inc_edge = np.array([i for _, i in flat], dtype=np.int64)
        self.target_bytes = self.target.tobytes()

    def encode(self, edges) -> np.ndarray:
        out = np.zeros(len(self.edges), dtype=np.int8)
        for i, e in enumerate(self.edges):
            s = edges.get(e)
            if s is not None:
                out[i] = K.CLOSE if s is EdgeState.CLOSE else K.OPEN
        return out

    def candidates(self, state):
        return K.candidate_actions(
            self.kind, self.eu, self.ev, state, self.is_b, self.is_r, self.inc_ptr, self.inc_edge, self.inc_other
        )

    def decode(self, row):
        code = row[0]
        if code == K.SWITCH:
            return Switch(self.ids[row[3]], self.ids[row[4]], self.ids[row[5]])
        e = self.edges[row[1]]
        return Add(e) if code == K.ADD else Remove(e)

    def switch_bound(self, state) -> int:
        return K.needy_count(state, self.target, self.is_r) // 2

    def steps_bound(self, state, sequential: bool) -> int:
        return K.steps_lower_bound(self.kind, self.eu, self.ev, state, self.target, self.is_b, self.is_r, sequential)

    def pending(self, state) -> int:
        return K.pending_edits(state, self.target, self.is_b, self.is_r)

    def last_step(self, state):
        """Lexicographically smallest action set turning ``state`` into the target, or None."""
        k = K.last_step_switches(self.kind, self.eu, self.ev, state, self.target, self.is_b, self.is_r)
        if k < 0:
            return None
        actions = []
        closing, opening = [], []
        for i, e in enumerate(self.edges):
            c, t = state[i], (K.ABSENT if self.is_r[i] else self.target[i])
            if c == t:
                continue
            if c == K.ABSENT:
                actions.append(Add(e))
            elif t == K.ABSENT:
                actions.append(Remove(e))
            elif c == K.CLOSE:
                closing.append(e)
            else:
                opening.append(e)
        pairs = []
        for c in closing:
            for o in opening:
                for x in {c.u, c.v} & {o.u, o.v}:
                    if not self.instance.start.is_primary(x):
                        pairs.append(Switch(x, c.other(x), o.other(x)))
        pairs.sort(key=lambda a: a.key)
        chosen = _smallest_pairing(pairs, set(closing), set(opening))
        if chosen is None:  # pragma: no cover - kernel already proved a pairing exists
            return None
        return actions + chosen


def candidate_actions(g: PowerGrid, inst: Instance) -> list:
    """Applicable actions in ``g`` that respect the instance's buildable/removable sets, canonically ordered."""
    prob = Problem(inst)
    extra = set(g.edges) - set(prob.edges)
    if extra:
        raise ValueError(f"grid has edges outside the instance: {sorted(map(str, extra))}")
    return [prob.decode(row) for row in prob.candidates(prob.encode(g.edges))]


def _switch_edges(a: Switch):
    return Edge.of(a.pivot, a.from_), Edge.of(a.pivot, a.to)


def _has_pairing(pairs, closing, opening) -> bool:
    if not closing:
        return True
    c = min(closing)
    for a in pairs:
        ec, eo = _switch_edges(a)
        if ec == c and eo in opening:
            if _has_pairing(pairs, closing - {ec}, opening - {eo}):
                return True
    return False


def _smallest_pairing(pairs, closing, opening):
    chosen = []
    while closing:
        for a in pairs:
            ec, eo = _switch_edges(a)
            if ec in closing and eo in opening and _has_pairing(pairs, closing - {ec}, opening - {eo}):
                chosen.append(a)
                closing = closing - {ec}
                opening = opening - {eo}
                break
        else:
            return None
    return chosen


class _Search:
    def __init__(self, prob: Problem, cfg: SolveConfig, stats: SolveStats, deadline):
        self.p = prob
        self.cfg = cfg
        self.stats = stats
        self.deadline = deadline
        self.sequential = cfg.mode is Mode.SEQUENTIAL
        self.max_size = 1 if self.sequential else len(prob.edges) + 1
        self.maximal_first = cfg.objective is Objective.SATISFICING and not self.sequential
        self._tick = 0

    def _check_limits(self):
        self._tick += 1
        cfg = self.cfg
        if cfg.node_limit is not None and self.stats.expanded > cfg.node_limit:
            raise _LimitHit("node_limit")
        if self._tick % 64:
            return
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _LimitHit("time_limit")
        if cfg.memory_limit is not None:
            rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
            if rss > cfg.memory_limit:
                raise _LimitHit("memory_limit")

    def exists(self, budget: int, lo: int, hi: int):
        """First plan in search order with at most ``budget`` switches and lo <= length <= hi."""
        if (lo, hi) != getattr(self, "_window", None):
            # memos keyed on allowance stay valid across budgets for a fixed window
            self.failed = {}
            self._window = (lo, hi)
        self.budget = budget
        self.lo = lo
        self.hi = hi
        steps = self._dfs(self.p.start, 0, 0)
        if steps is None:
            return None
        return Plan(tuple(frozenset(s) for s in steps))

    def _dominated(self, key, t, sw) -> bool:
        allow = self.budget - sw
        for t0, a0 in self.failed.get(key, ()):
            if t0 <= t and a0 >= allow and (t0 == t or t0 >= self.lo):
                return True
        return False

    def _fail(self, key, t, sw):
        self.failed.setdefault(key, []).append((t, self.budget - sw))

    def _dfs(self, state, t, sw):
        p = self.p
        key = state.tobytes()
        if t >= self.lo and key == p.target_bytes:
            return []
        if t == self.hi or self._dominated(key, t, sw):
            return None
        self.stats.expanded += 1
        self._check_limits()
        remaining = self.hi - t
        slack = self.budget - sw - p.switch_bound(state)
        if slack < 0 or p.steps_bound(state, self.sequential) > remaining:
            self._fail(key, t, sw)
            return None
        if remaining == 1:
            result = None
            if t + 1 >= self.lo:
                step = p.last_step(state)
                if step and (not self.sequential or len(step) == 1):
                    result = [step]
            if result is None:
                self._fail(key, t, sw)
            return result
        acts = p.candidates(state)
        members, sizes, states, spent, count, _ = K.enumerate_steps(
            p.kind, p.eu, p.ev, state, p.target, p.is_b, p.is_r, acts,
            slack, self.max_size, remaining, self.sequential, 1 << 62,
        )
        self.stats.generated += count
        order = range(count)
        if self.maximal_first:
            order = sorted(order, key=lambda k: -sizes[k])
        for k in order:
            rest = self._dfs(states[k], t + 1, sw + spent[k])
            if rest is not None:
                return [[p.decode(acts[j]) for j in members[k, : sizes[k]]]] + rest
        self._fail(key, t, sw)
        return None


def _max_switches(prob: Problem, cfg: SolveConfig, hi: int) -> int:
    if cfg.mode is Mode.SEQUENTIAL:
        return hi - prob.pending(prob.start)
    return hi * (len(prob.edges) // 2)


def _budget_schedule(first: int, last: int):
    """first, first+1, first+2, then doubling slack, always ending at last."""
    out = []
    slack = 0
    while first + slack < last:
        out.append(first + slack)
        slack = slack + 1 if slack < 2 else slack * 2
    out.append(last)
    return out


def solve_bounded(
    inst: Instance, cfg: SolveConfig, lo: int, hi: int, *, _deadline=None, _stats=None, _budget_cap=None
) -> SolveResult:
    """Search for a plan whose length lies in [lo, hi].

    Optimal mode returns the lexicographically cheapest (switches, length)
    plan in the window, ties broken by the canonical action order.
    """
    if not 1 <= lo <= hi:
        raise InvalidWindow(f"invalid window [{lo}, {hi}]")
    t0 = time.monotonic()
    stats = _stats if _stats is not None else SolveStats()
    deadline = _deadline
    if deadline is None and cfg.time_limit is not None:
        deadline = t0 + cfg.time_limit
    prob = Problem(inst)
    search = _Search(prob, cfg, stats, deadline)
    best = None
    sequential = cfg.mode is Mode.SEQUENTIAL

    def finish(outcome, plan=None, proven=False):
        if _stats is None:
            stats.wall_time = time.monotonic() - t0
        return SolveResult(outcome, plan, stats, hi if outcome is Outcome.UNSAT else None, proven)

    if K.needy_count(prob.start, prob.target, prob.is_r) % 2:
        return finish(Outcome.UNSAT)
    if prob.steps_bound(prob.start, sequential) > hi:
        return finish(Outcome.UNSAT)
    first = prob.switch_bound(prob.start)
    last = _max_switches(prob, cfg, hi)
    if _budget_cap is not None:
        last = min(last, _budget_cap)
    if last < first:
        return finish(Outcome.UNSAT)
    try:
        if cfg.objective is Objective.SATISFICING:
            for budget in _budget_schedule(min(first + 2, last), last):
                plan = search.exists(budget, lo, hi)
                if plan is not None:
                    return finish(Outcome.SOLVED, plan)
            return finish(Outcome.UNSAT)
        failed_below = first - 1
        for budget in _budget_schedule(first, last):
            best = search.exists(budget, lo, hi)
            if best is not None:
                break
            failed_below = budget
        if best is None:
            return finish(Outcome.UNSAT)
        # binary search for the least feasible budget
        top = best.num_switches
        while failed_below + 1 < top:
            mid = (failed_below + 1 + top) // 2
            plan = search.exists(mid, lo, hi)
            if plan is None:
                failed_below = mid
            else:
                best = plan
                top = plan.num_switches
        budget = top
        # shortest plan at that budget; the final run also fixes canonical tie-breaking
        floor = max(lo, prob.steps_bound(prob.start, sequential))
        for length in range(floor, len(best) + 1):
            plan = search.exists(budget, lo, length)
            if plan is not None:
                best = plan
                break
        return finish(Outcome.SOLVED, best, proven=True)
    except _LimitHit as hit:
        stats.limit = hit.what
        return finish(Outcome.RESOURCE, best)


def solve(inst: Instance, cfg: SolveConfig) -> SolveResult:
    """Exponential horizon search over windows [2^h, 2^(h+1)], h = 0, 1, ..."""
    t0 = time.monotonic()
    stats = SolveStats()
    deadline = t0 + cfg.time_limit if cfg.time_limit is not None else None

    def done(res: SolveResult) -> SolveResult:
        stats.wall_time = time.monotonic() - t0
        res.stats = stats
        return res

    if not cfg.strict_nonempty and inst.start == inst.target:
        stats.windows.append((0, 0, Outcome.SOLVED.value))
        return done(SolveResult(Outcome.SOLVED, Plan(()), proven_optimal=True))
    h = 0
    while 2**h <= cfg.max_horizon:
        lo, hi = 2**h, min(2 ** (h + 1), cfg.max_horizon)
        res = solve_bounded(inst, cfg, lo, hi, _deadline=deadline, _stats=stats)
        stats.windows.append((lo, hi, res.outcome.value))
        log.debug("window [%d, %d]: %s", lo, hi, res.outcome.value)
        if res.outcome is Outcome.SOLVED and _needs_closing(inst, cfg, res, hi):
            res = _close_gap(inst, cfg, res, deadline, stats)
        if res.outcome is not Outcome.UNSAT:
            return done(res)
        if hi == cfg.max_horizon:
            break
        h += 1
    return done(SolveResult(Outcome.UNSAT, max_horizon=cfg.max_horizon))


def _horizon_cover(inst: Instance, switches: int) -> int:
    # a parallel plan never has more steps than actions
    return switches + len(inst.buildable) + len(inst.removable)


def _needs_closing(inst: Instance, cfg: SolveConfig, res: SolveResult, hi: int) -> bool:
    if cfg.objective is not Objective.OPTIMAL or cfg.window_only or cfg.mode is Mode.SEQUENTIAL:
        return False
    sw = res.plan.num_switches
    prob = Problem(inst)
    if sw <= prob.switch_bound(prob.start):
        return False
    return min(_horizon_cover(inst, sw - 1), cfg.max_horizon) > hi


def _close_gap(inst: Instance, cfg: SolveConfig, res: SolveResult, deadline, stats: SolveStats) -> SolveResult:
    """Look for a plan with fewer switches that is longer than the solved window.

    Lengths below the window were refuted earlier and the window plan is the
    shortest at its own switch count, so only cheaper budgets need checking.
    """
    sw = res.plan.num_switches
    cover = min(_horizon_cover(inst, sw - 1), cfg.max_horizon)
    wider = solve_bounded(inst, cfg, 1, cover, _deadline=deadline, _stats=stats, _budget_cap=sw - 1)
    stats.windows.append((1, cover, wider.outcome.value))
    if wider.outcome is Outcome.SOLVED:
        return wider
    if wider.outcome is Outcome.UNSAT:
        return res
    # resource limit: the window optimum stays the best known plan
    return SolveResult(Outcome.SOLVED, res.plan, stats, proven_optimal=False)
