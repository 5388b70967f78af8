"""Power grid values and the add/remove/switch transition system."""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Union

import numpy as np

from . import kernels

_NODE_ID = re.compile(r"^[a-z][a-z0-9_]*$")


class GridError(Exception):
    """Base class for grid model errors."""


class UnknownNode(GridError):
    pass


class NotApplicable(GridError):
    def __init__(self, action: "Action", reason: str):
        super().__init__(f"{action} not applicable: {reason}")
        self.action = action
        self.reason = reason


class Interference(GridError):
    def __init__(self, a1: "Action", a2: "Action"):
        super().__init__(f"{a1} and {a2} affect a common edge")
        self.a1 = a1
        self.a2 = a2


class NodeKind(enum.Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"


class EdgeState(enum.Enum):
    OPEN = "open"
    CLOSE = "close"


def check_node_id(x: str) -> str:
    if not isinstance(x, str) or not _NODE_ID.match(x):
        raise ValueError(f"invalid node identifier {x!r}")
    return x


@dataclass(frozen=True, order=True)
class Edge:
    """Undirected edge stored with ``u < v``."""

    u: str
    v: str

    def __post_init__(self):
        check_node_id(self.u)
        check_node_id(self.v)
        if not self.u < self.v:
            raise ValueError(f"edge ({self.u},{self.v}) is not canonical")

    @classmethod
    def of(cls, x: str, y: str) -> "Edge":
        return cls(x, y) if x < y else cls(y, x)

    def other(self, x: str) -> str:
        return self.v if x == self.u else self.u

    def __str__(self):
        return f"({self.u},{self.v})"


@dataclass(frozen=True)
class Add:
    edge: Edge

    @property
    def key(self):
        return (0, self.edge.u, self.edge.v)

    def __str__(self):
        return f"add({self.edge.u},{self.edge.v})"


@dataclass(frozen=True)
class Remove:
    edge: Edge

    @property
    def key(self):
        return (1, self.edge.u, self.edge.v)

    def __str__(self):
        return f"remove({self.edge.u},{self.edge.v})"


@dataclass(frozen=True)
class Switch:
    """Open the closed edge (pivot, from_) and close the open edge (pivot, to)."""

    pivot: str
    from_: str
    to: str

    def __post_init__(self):
        for x in (self.pivot, self.from_, self.to):
            check_node_id(x)
        if len({self.pivot, self.from_, self.to}) != 3:
            raise ValueError(f"switch nodes must be pairwise distinct: {self}")

    @property
    def key(self):
        return (2, self.pivot, self.from_, self.to)

    @property
    def inverse(self) -> "Switch":
        return Switch(self.pivot, self.to, self.from_)

    def __str__(self):
        return f"switch({self.pivot},{self.from_},{self.to})"


Action = Union[Add, Remove, Switch]


def action_key(a: Action):
    """Total order on actions: add < remove < switch, then by node ids."""
    return a.key


def affected_edges(a: Action) -> frozenset:
    if isinstance(a, Switch):
        return frozenset((Edge.of(a.pivot, a.from_), Edge.of(a.pivot, a.to)))
    return frozenset((a.edge,))


def compatible(a1: Action, a2: Action) -> bool:
    return affected_edges(a1).isdisjoint(affected_edges(a2))


def sorted_actions(actions: Iterable[Action]) -> list:
    return sorted(actions, key=action_key)


@dataclass(frozen=True)
class Plan:
    """Sequence of action sets; step ``i`` turns grid ``i`` into grid ``i + 1``."""

    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(frozenset(s) for s in self.steps))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    @property
    def num_actions(self) -> int:
        return sum(len(s) for s in self.steps)

    @property
    def num_switches(self) -> int:
        return sum(isinstance(a, Switch) for s in self.steps for a in s)

    @property
    def max_step_size(self) -> int:
        return max((len(s) for s in self.steps), default=0)

    def sort_key(self):
        return tuple(tuple(action_key(a) for a in sorted_actions(s)) for s in self.steps)

    def __str__(self):
        return " ; ".join("{" + ", ".join(map(str, sorted_actions(s))) + "}" for s in self.steps)


def plan_cost(plan: Plan) -> tuple:
    """(number of switches, number of steps), compared lexicographically."""
    return (plan.num_switches, len(plan))


@dataclass(frozen=True, eq=False)
class PowerGrid:
    nodes: Mapping[str, NodeKind]
    edges: Mapping[Edge, EdgeState] = field(default_factory=dict)

    def __post_init__(self):
        nodes = {check_node_id(x): NodeKind(k) for x, k in sorted(self.nodes.items())}
        edges = {}
        for e, s in sorted(self.edges.items()):
            if not isinstance(e, Edge):
                e = Edge(*e)
            for x in (e.u, e.v):
                if x not in nodes:
                    raise UnknownNode(x)
            edges[e] = EdgeState(s)
        if not any(k is NodeKind.PRIMARY for k in nodes.values()):
            raise ValueError("a power grid needs at least one primary node")
        object.__setattr__(self, "nodes", MappingProxyType(nodes))
        object.__setattr__(self, "edges", MappingProxyType(edges))

    # -- structural identity -------------------------------------------------

    @cached_property
    def _key(self):
        return (
            tuple((x, k.value) for x, k in self.nodes.items()),
            tuple((e.u, e.v, s.value) for e, s in self.edges.items()),
        )

    def __eq__(self, other):
        if not isinstance(other, PowerGrid):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    @cached_property
    def content_hash(self) -> str:
        """Stable digest over sorted nodes and (edge, state) pairs."""
        h = hashlib.sha256()
        for x, k in self._key[0]:
            h.update(f"n {x} {k}\n".encode())
        for u, v, s in self._key[1]:
            h.update(f"e {u} {v} {s}\n".encode())
        return h.hexdigest()

    def __repr__(self):
        es = ", ".join(f"{e}:{s.value}" for e, s in self.edges.items())
        return f"PowerGrid(P={self.primaries}, S={self.secondaries}, E=[{es}])"

    # -- queries ---------------------------------------------------------------

    @property
    def primaries(self) -> tuple:
        return tuple(x for x, k in self.nodes.items() if k is NodeKind.PRIMARY)

    @property
    def secondaries(self) -> tuple:
        return tuple(x for x, k in self.nodes.items() if k is NodeKind.SECONDARY)

    def is_primary(self, x: str) -> bool:
        return self.nodes[x] is NodeKind.PRIMARY

    def state(self, x: str, y: str):
        """State of the edge between x and y, or None when absent."""
        if x == y:
            return None
        return self.edges.get(Edge.of(x, y))

    def closed_edges(self) -> list:
        return [e for e, s in self.edges.items() if s is EdgeState.CLOSE]

    def open_edges(self) -> list:
        return [e for e, s in self.edges.items() if s is EdgeState.OPEN]

    def incident(self, x: str) -> list:
        return [e for e in self.edges if x in (e.u, e.v)]

    def degree(self, x: str) -> int:
        if x not in self.nodes:
            raise UnknownNode(x)
        return len(self.incident(x))

    def with_edges(self, edges: Mapping[Edge, EdgeState]) -> "PowerGrid":
        return PowerGrid(self.nodes, edges)

    @cached_property
    def arrays(self):
        """(node ids, kind, eu, ev, state) for the kernels; universe = present edges."""
        ids = list(self.nodes)
        index = {x: i for i, x in enumerate(ids)}
        kind = np.array([k is NodeKind.PRIMARY for k in self.nodes.values()], dtype=np.int8)
        m = len(self.edges)
        eu = np.empty(m, dtype=np.int64)
        ev = np.empty(m, dtype=np.int64)
        st = np.empty(m, dtype=np.int8)
        for i, (e, s) in enumerate(self.edges.items()):
            eu[i] = index[e.u]
            ev[i] = index[e.v]
            st[i] = kernels.CLOSE if s is EdgeState.CLOSE else kernels.OPEN
        return ids, kind, eu, ev, st


def applicability(g: PowerGrid, a: Action):
    """None when ``a`` is applicable in ``g``, otherwise a reason string."""
    if isinstance(a, Add):
        e = a.edge
        if e.u not in g.nodes or e.v not in g.nodes:
            return "unknown node"
        if e in g.edges:
            return f"edge {e} already present"
        return None
    if isinstance(a, Remove):
        s = g.edges.get(a.edge)
        if s is None:
            return f"edge {a.edge} absent"
        if s is not EdgeState.OPEN:
            return f"edge {a.edge} is closed"
        return None
    if a.pivot not in g.nodes:
        return "unknown node"
    if g.nodes[a.pivot] is not NodeKind.SECONDARY:
        return f"pivot {a.pivot} is not secondary"
    if g.state(a.pivot, a.from_) is not EdgeState.CLOSE:
        return f"edge {Edge.of(a.pivot, a.from_)} is not closed"
    if g.state(a.pivot, a.to) is not EdgeState.OPEN:
        return f"edge {Edge.of(a.pivot, a.to)} is not open"
    return None


def applicable(g: PowerGrid, a: Action) -> bool:
    return applicability(g, a) is None


def _apply_in_place(edges: dict, a: Action):
    if isinstance(a, Add):
        edges[a.edge] = EdgeState.OPEN
    elif isinstance(a, Remove):
        del edges[a.edge]
    else:
        edges[Edge.of(a.pivot, a.from_)] = EdgeState.OPEN
        edges[Edge.of(a.pivot, a.to)] = EdgeState.CLOSE


def apply_action(g: PowerGrid, a: Action) -> PowerGrid:
    reason = applicability(g, a)
    if reason is not None:
        raise NotApplicable(a, reason)
    edges = dict(g.edges)
    _apply_in_place(edges, a)
    return g.with_edges(edges)


def check_compatible(actions: Iterable[Action]):
    """Raise Interference for the first pair of actions sharing an affected edge."""
    seen = {}
    for a in sorted_actions(actions):
        for e in affected_edges(a):
            if e in seen:
                raise Interference(seen[e], a)
            seen[e] = a


def apply_action_set(g: PowerGrid, actions: Iterable[Action]) -> PowerGrid:
    actions = list(actions)
    check_compatible(actions)
    for a in actions:
        reason = applicability(g, a)
        if reason is not None:
            raise NotApplicable(a, reason)
    edges = dict(g.edges)
    for a in actions:
        _apply_in_place(edges, a)
    return g.with_edges(edges)


def degree(g: PowerGrid, x: str) -> int:
    return g.degree(x)


def make_grid(primaries: Iterable[str], secondaries: Iterable[str], edges=()) -> PowerGrid:
    """Convenience constructor: ``edges`` holds ``(x, y, "open"|"close")`` triples."""
    nodes = {x: NodeKind.PRIMARY for x in primaries}
    nodes.update({x: NodeKind.SECONDARY for x in secondaries})
    return PowerGrid(nodes, {Edge.of(x, y): EdgeState(s) for x, y, s in edges})
