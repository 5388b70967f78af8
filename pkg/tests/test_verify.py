from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _mutations import MUTATIONS
from gridplan.generator import GenConfig, generate_instance
from gridplan.grid import Add, Edge, Plan, Remove, Switch, make_grid
from gridplan.instance_io import Instance, parse_instance
from gridplan.planner import SolveConfig, solve
from gridplan.verify import (
    EMPTY_STEP,
    FINAL_MISMATCH,
    INTERFERENCE,
    NONCOMPLIANT_STATE,
    NOT_APPLICABLE,
    NOT_BUILDABLE,
    NOT_REMOVABLE,
    NOT_SEQUENTIAL,
    REVERSED_EDIT,
    CapExceeded,
    oracle_shortest,
    validate_plan,
)

E = Edge.of
SW = Switch("s1", "p1", "s2")


def test_ring4_plan_is_valid(ring4):
    rep = validate_plan(ring4, Plan(({SW},)))
    assert rep.valid and rep.failures == [] and str(rep) == "valid"


def test_duplicated_step_is_not_applicable(ring4):
    rep = validate_plan(ring4, Plan(({SW}, {SW})))
    assert not rep.valid
    assert rep.failures[0].step == 1 and rep.failures[0].code == NOT_APPLICABLE


def test_add_outside_buildable(ring4):
    rep = validate_plan(ring4, Plan(({Add(E("p2", "s1"))}, {SW})))
    assert NOT_BUILDABLE in rep.codes


def test_remove_outside_removable(ring4):
    plan = Plan(({Remove(E("s1", "s2"))},))
    assert NOT_REMOVABLE in validate_plan(ring4, plan).codes


def test_interference(ring4):
    rep = validate_plan(ring4, Plan(({SW, Switch("s2", "p2", "s1")},)))
    assert INTERFERENCE in rep.codes


def test_empty_step_and_final_mismatch(ring4):
    rep = validate_plan(ring4, Plan((set(), {SW})))
    assert rep.codes == {EMPTY_STEP}
    assert validate_plan(ring4, Plan(())).codes == {FINAL_MISMATCH}


SWAP_TIE_TEXT = """\
node(p1). node(p2). node(s1). node(s2). node(s3).
node_attr(p1,is_primary). node_attr(p2,is_primary).
start(p1,s1,close). start(s1,s2,open). start(p2,s2,close). start(s1,s3,open). start(s2,s3,close).
target(p1,s1,close). target(s1,s2,open). target(p2,s2,close). target(s2,s3,close). target(p2,s3,open).
"""


def test_noncompliant_intermediate():
    inst = parse_instance(SWAP_TIE_TEXT)
    good = Plan(({Add(E("p2", "s3"))}, {Remove(E("s1", "s3"))}))
    assert validate_plan(inst, good).valid
    # removing first leaves s3 with a single line
    rep = validate_plan(inst, Plan(({Remove(E("s1", "s3"))}, {Add(E("p2", "s3"))})))
    assert [(f.step, f.code) for f in rep.failures] == [(0, NONCOMPLIANT_STATE)]
    assert "DEGREE_LOW(s3)" in rep.failures[0].detail


def test_reversed_edit():
    inst = parse_instance(SWAP_TIE_TEXT)
    e = E("s1", "s3")
    plan = Plan(({Remove(e)}, {Add(e)}))
    assert REVERSED_EDIT in validate_plan(inst, plan).codes


def test_sequential_mode_rejects_parallel_steps(parallel_only):
    res = solve(parallel_only, SolveConfig())
    assert validate_plan(parallel_only, res.plan, "parallel").valid
    assert NOT_SEQUENTIAL in validate_plan(parallel_only, res.plan, "sequential").codes


def test_noncompliant_start_is_reported(ring4):
    g = make_grid(["p1", "p2"], ["s1", "s2"], [("p1", "s1", "close"), ("p2", "s2", "close")])
    broken = Instance.from_grids(g, g, check=False)
    rep = validate_plan(broken, Plan(()))
    assert [(f.step, f.code) for f in rep.failures] == [(0, NONCOMPLIANT_STATE)]


def test_report_dict(ring4):
    d = validate_plan(ring4, Plan(({SW}, {SW}))).to_dict()
    assert d["valid"] is False and d["failures"][0]["code"] == NOT_APPLICABLE


# -- oracle --------------------------------------------------------------------------


def test_oracle_ring4(ring4):
    for mode in ("sequential", "parallel"):
        plan, cost = oracle_shortest(ring4, mode)
        assert plan == Plan(({SW},)) and cost == (1, 1)


def test_oracle_trivial(ring4):
    same = Instance.from_grids(ring4.start, ring4.start)
    assert oracle_shortest(same) == (Plan(()), (0, 0))


def test_oracle_cap(chain):
    assert oracle_shortest(chain, "parallel", length_cap=1) is None
    with pytest.raises(CapExceeded):
        oracle_shortest(generate_instance(GenConfig(12, 2, Fraction(9, 5), 0)).instance, "parallel", 6, state_budget=50)


def test_oracle_plans_validate(parallel_only):
    plan, cost = oracle_shortest(parallel_only, "parallel", 6)
    assert validate_plan(parallel_only, plan).valid


# -- mutation classes ------------------------------------------------------------------


@settings(max_examples=30)
@given(st.integers(6, 10), st.sampled_from([Fraction(3, 5), Fraction(1)]), st.integers(0, 10**6))
def test_mutations_are_rejected(n, alpha, seed):
    gi = generate_instance(GenConfig(n, 2, alpha, seed))
    inst = gi.instance
    rng = np.random.default_rng(seed)
    plans = [gi.witness, solve(inst, SolveConfig()).plan]
    for plan in plans:
        assert validate_plan(inst, plan).valid
        for name, mutate in MUTATIONS.items():
            bad = mutate(plan, rng, inst)
            if bad is not None:
                assert not validate_plan(inst, bad).valid, name
