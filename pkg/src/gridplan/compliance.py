"""Radiality, reconfigurability and degree compliance of power grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import EdgeState, NodeKind, PowerGrid, UnknownNode

PRIMARY_LOOP = "PRIMARY_LOOP"
UNSUPPLIED_SECONDARY = "UNSUPPLIED_SECONDARY"
CLOSED_CYCLE = "CLOSED_CYCLE"
NOT_REDUNDANT = "NOT_REDUNDANT"
DEGREE_LOW = "DEGREE_LOW"
DEGREE_HIGH = "DEGREE_HIGH"


class NotRadial(Exception):
    pass


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str


@dataclass(frozen=True)
class ComplianceReport:
    radial: bool
    reconfigurable: bool
    degree_compliant: bool
    violations: tuple = field(default_factory=tuple)

    @property
    def compliant(self) -> bool:
        return self.radial and self.reconfigurable and self.degree_compliant

    def to_dict(self) -> dict:
        return {
            "compliant": self.compliant,
            "radial": self.radial,
            "reconfigurable": self.reconfigurable,
            "degree_compliant": self.degree_compliant,
            "violations": [vars(v) for v in self.violations],
        }

    def __str__(self):
        lines = [
            f"radial: {self.radial}",
            f"reconfigurable: {self.reconfigurable}",
            f"degree_compliant: {self.degree_compliant}",
        ]
        lines += [f"{v.code} {v.subject}: {v.message}" for v in self.violations]
        return "\n".join(lines)


def _owners(g: PowerGrid):
    ids, kind, eu, ev, st = g.arrays
    owner = np.empty(len(ids), dtype=np.int64)
    ok = kernels.radial_uf(kind, eu, ev, st, owner)
    return ok, owner


def is_radial(g: PowerGrid) -> bool:
    return bool(_owners(g)[0])


def is_radial_by_count(g: PowerGrid) -> bool:
    _, kind, eu, ev, st = g.arrays
    return bool(kernels.radial_count(kind, eu, ev, st))


def _require_secondary(g: PowerGrid, s: str):
    if s not in g.nodes:
        raise UnknownNode(s)
    if g.nodes[s] is not NodeKind.SECONDARY:
        raise ValueError(f"{s} is not a secondary node")


def _local_owner(g: PowerGrid, s: str) -> str:
    """Primary of ``s``'s closed component; the component must be a tree with one primary."""
    comp, stack, n_edges = {s}, [s], 0
    while stack:
        x = stack.pop()
        for e in g.incident(x):
            if g.edges[e] is not EdgeState.CLOSE:
                continue
            n_edges += 1
            y = e.other(x)
            if y not in comp:
                comp.add(y)
                stack.append(y)
    prims = [x for x in comp if g.is_primary(x)]
    if n_edges // 2 != len(comp) - 1 or len(prims) != 1:
        raise NotRadial(f"closed component of {s} is not a tree with one primary")
    return prims[0]


def assigned_primary(g: PowerGrid, s: str) -> str:
    """The primary feeding ``s`` through the closed network.

    Only the closed component of ``s`` has to be radial.
    """
    _require_secondary(g, s)
    return _local_owner(g, s)


def _redundancy(g: PowerGrid):
    ok, owner = _owners(g)
    if not ok:
        raise NotRadial("grid is not radial")
    ids, kind, eu, ev, st = g.arrays
    flags = np.empty(len(ids), dtype=np.bool_)
    all_ok = kernels.redundancy_flags(kind, eu, ev, st, owner, flags)
    return bool(all_ok), flags


def is_redundantly_connected(g: PowerGrid, s: str) -> bool:
    _require_secondary(g, s)
    owner = _local_owner(g, s)
    seen, stack = {s}, [s]
    while stack:
        x = stack.pop()
        for e in g.incident(x):
            y = e.other(x)
            if g.is_primary(y):
                if y != owner:
                    return True
            elif y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def is_reconfigurable(g: PowerGrid) -> bool:
    return _redundancy(g)[0]


def is_degree_compliant(g: PowerGrid) -> bool:
    _, kind, eu, ev, st = g.arrays
    return bool(kernels.degree_ok(kind, eu, ev, st))


def is_compliant(g: PowerGrid) -> bool:
    _, kind, eu, ev, st = g.arrays
    return bool(kernels.compliant(kind, eu, ev, st))


def _radiality_violations(g: PowerGrid) -> list:
    """Itemize radiality problems with a plain traversal of the closed network."""
    adj = {x: [] for x in g.nodes}
    for e in g.closed_edges():
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    out = []
    seen = set()
    for root in g.nodes:
        if root in seen:
            continue
        comp = []
        stack = [root]
        seen.add(root)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        n_edges = sum(len(adj[x]) for x in comp) // 2
        prims = sorted(x for x in comp if g.is_primary(x))
        secs = sorted(x for x in comp if not g.is_primary(x))
        if n_edges >= len(comp):
            out.append(Violation(CLOSED_CYCLE, min(comp), f"closed component of {min(comp)} contains a cycle"))
        if len(prims) > 1:
            out.append(Violation(PRIMARY_LOOP, ",".join(prims), "primaries connected in the closed network"))
        if not prims:
            for s in secs:
                out.append(Violation(UNSUPPLIED_SECONDARY, s, "no primary in its closed component"))
    return out


def check_compliance(g: PowerGrid) -> ComplianceReport:
    violations = []
    radial = is_radial(g)
    if not radial:
        violations += _radiality_violations(g)
    reconfigurable = False
    if radial:
        ok, flags = _redundancy(g)
        reconfigurable = ok
        for i, x in enumerate(g.arrays[0]):
            if not flags[i]:
                violations.append(Violation(NOT_REDUNDANT, x, "no secondary-only path to another primary"))
    for s in g.secondaries:
        d = g.degree(s)
        if d < 2:
            violations.append(Violation(DEGREE_LOW, s, f"degree {d} < 2"))
        elif d > 3:
            violations.append(Violation(DEGREE_HIGH, s, f"degree {d} > 3"))
    degree_ok = not any(v.code in (DEGREE_LOW, DEGREE_HIGH) for v in violations)
    if not radial:
        violations.append(Violation(NOT_REDUNDANT, "*", "reconfigurability not evaluated: grid is not radial"))
    return ComplianceReport(radial, reconfigurable, degree_ok, tuple(violations))
