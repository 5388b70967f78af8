import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from gridplan.grid import make_grid
from gridplan.instance_io import parse_instance

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

RING4_TEXT = """\
node(p1). node(p2). node(s1). node(s2).
node_attr(p1,is_primary). node_attr(p2,is_primary).
start(p1,s1,close).
start(p2,s2,close).
start(s1,s2,open).
target(p1,s1,open).
target(p2,s2,close).
target(s1,s2,close).
"""

# add(p2,s1) must precede the switch that closes it
CHAIN_TEXT = """\
node(p1). node(p2). node(s1). node(s2).
node_attr(p1,is_primary). node_attr(p2,is_primary).
start(p1,s1,close).
start(p2,s2,close).
start(s1,s2,open).
target(p1,s1,open).
target(p2,s1,close).
target(p2,s2,close).
target(s1,s2,open).
"""

# solvable only with simultaneous switches
PARALLEL_ONLY_TEXT = """\
node(p1). node(p2). node(s1). node(s2). node(s3).
node_attr(p1,is_primary). node_attr(p2,is_primary).
start(p1,s1,open).
start(p2,s1,close).
start(p2,s2,close).
start(s1,s3,close).
start(s2,s3,open).
target(p1,s1,close).
target(p2,s1,open).
target(p2,s3,close).
target(s1,s2,close).
target(s2,s3,open).
"""

SMALL_ALPHAS = (Fraction(1, 5), Fraction(3, 5))


@pytest.fixture
def ring4():
    return parse_instance(RING4_TEXT)


@pytest.fixture
def ring4_grid(ring4):
    return ring4.start


@pytest.fixture
def chain():
    return parse_instance(CHAIN_TEXT)


@pytest.fixture
def parallel_only():
    return parse_instance(PARALLEL_ONLY_TEXT)


def ring4_grid_value():
    return make_grid(["p1", "p2"], ["s1", "s2"], [("p1", "s1", "close"), ("p2", "s2", "close"), ("s1", "s2", "open")])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
