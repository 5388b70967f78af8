from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import RING4_TEXT
from gridplan.generator import GenConfig, generate_instance
from gridplan.grid import Add, Edge, Plan, Switch, apply_action, plan_cost
from gridplan.instance_io import Instance, parse_instance
from gridplan.planner import (
    InvalidWindow,
    Mode,
    Objective,
    Outcome,
    SolveConfig,
    candidate_actions,
    solve,
    solve_bounded,
)
from gridplan.verify import oracle_shortest, validate_plan

E = Edge.of
SEQ = SolveConfig(mode="sequential")
PAR = SolveConfig(mode="parallel")

# every add pushes a secondary to degree 4 and the removable edge is the only open one
DEADLOCK_TEXT = """\
node(p1). node(p2). node(s1). node(s2). node(s3).
node_attr(p1,is_primary). node_attr(p2,is_primary).
start(p1,s2,close).
start(p2,s3,open).
start(s1,s2,close).
start(s1,s3,open).
start(s2,s3,close).
target(p1,s3,open).
target(p2,s2,close).
target(s1,s2,close).
target(s1,s3,close).
target(s2,s3,open).
"""


def test_candidates_ring4(ring4):
    assert set(candidate_actions(ring4.start, ring4)) == {Switch("s1", "p1", "s2"), Switch("s2", "p2", "s1")}


def test_add_is_a_candidate_until_built(chain):
    add = Add(E("p2", "s1"))
    assert add in candidate_actions(chain.start, chain)
    built = apply_action(chain.start, add)
    assert add not in candidate_actions(built, chain)


def test_candidates_at_goal_but_goal_first(ring4):
    assert candidate_actions(ring4.target, ring4)
    same = Instance.from_grids(ring4.target, ring4.target)
    res = solve(same, PAR)
    assert res.solved and len(res.plan) == 0 and res.cost == (0, 0)


@pytest.mark.parametrize("cfg", [SEQ, PAR], ids=["sequential", "parallel"])
def test_ring4_bounded(ring4, cfg):
    res = solve_bounded(ring4, cfg, 1, 2)
    assert res.outcome is Outcome.SOLVED
    assert res.plan == Plan(({Switch("s1", "p1", "s2")},))
    assert res.cost == (1, 1) == oracle_shortest(ring4, cfg.mode)[1]
    assert res.proven_optimal


def test_ring4_solved_in_first_window(ring4):
    res = solve(ring4, PAR)
    assert res.stats.windows == [(1, 2, "Solved")]


def test_invalid_window(ring4):
    for lo, hi in [(0, 2), (3, 2), (-1, 1)]:
        with pytest.raises(InvalidWindow):
            solve_bounded(ring4, PAR, lo, hi)


def test_identical_start_and_target(ring4):
    same = Instance.from_grids(ring4.start, ring4.start)
    strict = SolveConfig(strict_nonempty=True)
    assert solve_bounded(same, strict, 1, 1).outcome is Outcome.UNSAT
    # a switch and its inverse return to the start
    res = solve(same, strict)
    assert res.solved and res.cost == (2, 2)
    assert validate_plan(same, res.plan).valid


def test_chain_needs_two_steps(chain):
    for cfg in (SEQ, PAR):
        assert solve_bounded(chain, cfg, 1, 1).outcome is Outcome.UNSAT
        res = solve(chain, cfg)
        assert res.plan == Plan(({Add(E("p2", "s1"))}, {Switch("s1", "p1", "p2")}))


def test_unsat_records_horizon(chain):
    res = solve(chain, SolveConfig(max_horizon=1))
    assert res.outcome is Outcome.UNSAT and res.max_horizon == 1
    assert res.plan is None


def test_deadlock_instance_is_unsat():
    inst = parse_instance(DEADLOCK_TEXT)
    assert oracle_shortest(inst, "parallel", 8) is None
    for mode in ("sequential", "parallel"):
        res = solve(inst, SolveConfig(mode=mode, max_horizon=16))
        assert res.outcome is Outcome.UNSAT and res.max_horizon == 16
        assert [w[:2] for w in res.stats.windows] == [(1, 2), (2, 4), (4, 8), (8, 16)]
    assert solve_bounded(inst, PAR, 1, 3).max_horizon == 3


def test_odd_flip_parity_is_unsat_without_search():
    # only (p1,s1) changes state: one flip cannot come from switches, which flip in pairs
    text = RING4_TEXT.replace("target(s1,s2,close).", "target(s1,s2,open).")
    inst = parse_instance(text, permissive=True)
    res = solve_bounded(inst, PAR, 1, 8)
    assert res.outcome is Outcome.UNSAT and res.stats.expanded == 0


def test_window_trace_for_length_five():
    gi = generate_instance(GenConfig(6, 2, Fraction(1), 1))
    res = solve(gi.instance, SEQ)
    assert len(res.plan) == 5
    assert res.cost == oracle_shortest(gi.instance, "sequential", 6)[1]
    assert res.stats.windows == [(1, 2, "UnsatWithinHorizon"), (2, 4, "UnsatWithinHorizon"), (4, 8, "Solved")]


def test_windows_cover_every_length():
    covered = set()
    h = 0
    while 2**h <= 256:
        covered |= set(range(2**h, min(2 ** (h + 1), 256) + 1))
        h += 1
    assert covered == set(range(1, 257))


def test_parallel_only_instance(parallel_only):
    assert solve(parallel_only, SEQ).outcome is Outcome.UNSAT
    res = solve(parallel_only, PAR)
    assert res.solved and res.plan.max_step_size > 1
    assert res.cost == oracle_shortest(parallel_only, "parallel", 6)[1]


def test_cheaper_plan_beyond_first_window(parallel_only):
    # the first solved window holds a 4-switch plan; a 3-switch plan needs 5 steps
    local = solve(parallel_only, SolveConfig(window_only=True))
    best = solve(parallel_only, PAR)
    assert local.cost == (4, 4)
    assert best.cost == (3, 5)
    # cover = 3 switches + 2 buildable + 2 removable
    assert best.stats.windows[-1][:2] == (1, 7)


def test_satisficing_returns_valid_plans(parallel_only, ring4, chain):
    for inst in (parallel_only, ring4, chain):
        res = solve(inst, SolveConfig(objective=Objective.SATISFICING))
        assert res.solved and validate_plan(inst, res.plan).valid


def test_node_limit_reports_resource():
    gi = generate_instance(GenConfig(12, 2, Fraction(9, 5), 0))
    res = solve(gi.instance, SolveConfig(node_limit=5))
    assert res.outcome is Outcome.RESOURCE and res.stats.limit == "node_limit"


def test_time_limit_reports_resource():
    gi = generate_instance(GenConfig(12, 2, Fraction(9, 5), 0))
    res = solve(gi.instance, SolveConfig(time_limit=0.0))
    assert res.outcome is Outcome.RESOURCE and res.stats.limit == "time_limit"


def test_result_dict(ring4):
    d = solve(ring4, PAR).to_dict()
    assert d["outcome"] == "Solved" and d["cost"] == {"switches": 1, "length": 1}
    assert d["stats"]["windows"]


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(max_horizon=0)
    with pytest.raises(ValueError):
        SolveConfig(mode="diagonal")
    assert SolveConfig(mode="sequential").mode is Mode.SEQUENTIAL


# -- properties over generated instances ----------------------------------------------

instances = st.builds(
    lambda n, a, s: generate_instance(GenConfig(n, 2, a, s)).instance,
    st.integers(6, 8),
    st.sampled_from([Fraction(1, 5), Fraction(3, 5)]),
    st.integers(0, 10**6),
)


@settings(max_examples=25)
@given(instances)
def test_solutions_validate_and_modes_dominate(inst):
    seq = solve(inst, SEQ)
    par = solve(inst, PAR)
    assert seq.solved and par.solved
    assert validate_plan(inst, seq.plan, "sequential").valid
    assert validate_plan(inst, par.plan, "parallel").valid
    assert par.cost[0] <= seq.cost[0] and par.cost[1] <= seq.cost[1]
    assert plan_cost(seq.plan)[1] == seq.plan.num_actions


@settings(max_examples=15)
@given(instances)
def test_sequential_matches_oracle(inst):
    res = solve(inst, SEQ)
    found = oracle_shortest(inst, "sequential", length_cap=len(res.plan))
    assert found is not None and found[1] == res.cost


@settings(max_examples=10)
@given(instances)
def test_deterministic(inst):
    a = solve(inst, SolveConfig(seed=3))
    b = solve(inst, SolveConfig(seed=3))
    assert a.plan == b.plan and a.stats.windows == b.stats.windows
