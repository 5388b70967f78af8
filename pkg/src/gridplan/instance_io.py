"""Fact-file reading and writing for grids, instances and plans, plus DOT export.

The format is a subset of ASP facts: ``name(arg,...).`` terminated by a dot,
whitespace-insensitive, with ``%`` starting a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .compliance import ComplianceReport, check_compliance
from .grid import Add, Edge, EdgeState, NodeKind, Plan, PowerGrid, Remove, Switch, UnknownNode, sorted_actions

PRIMARY_ATTRS = ("is_primary", "primary")


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FactSyntaxError(ParseError):
    pass


class NonCanonicalEdge(ParseError):
    pass


class DuplicateEdge(ParseError):
    pass


class DiffMismatch(ParseError):
    pass


class EmptyStep(ParseError):
    def __init__(self, t: int):
        super().__init__(f"time point {t} has no actions")
        self.t = t


class NonContiguousTime(ParseError):
    pass


class NodeSetMismatch(Exception):
    pass


class ComplianceError(Exception):
    def __init__(self, which: str, report: ComplianceReport):
        codes = ", ".join(sorted({v.code for v in report.violations}))
        super().__init__(f"{which} grid is not compliant ({codes})")
        self.which = which
        self.report = report


# -- fact scanner --------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([a-z_][A-Za-z0-9_]*)|(-?\d+)|(.))")


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.split("\n"))


class _Scanner:
    def __init__(self, text: str):
        self.text = _strip_comments(text)
        self.pos = 0

    @property
    def line(self) -> int:
        return self.text.count("\n", 0, self.pos) + 1

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self._skip_ws()
        return self.pos >= len(self.text)

    def _next(self):
        self._skip_ws()
        if self.pos >= len(self.text):
            raise FactSyntaxError("unexpected end of input", self.line)
        m = _TOKEN.match(self.text, self.pos)
        self.pos = m.end()
        return m.groups()

    def _peek_char(self):
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def term(self):
        ident, num, punct = self._next()
        if num is not None:
            return int(num)
        if ident is None:
            raise FactSyntaxError(f"unexpected {punct!r}", self.line)
        if self._peek_char() != "(":
            return ident
        self.pos += 1
        args = [self.term()]
        while True:
            _, _, punct = self._next()
            if punct == ")":
                return (ident, tuple(args))
            if punct != ",":
                raise FactSyntaxError(f"expected ',' or ')' in {ident}(...)", self.line)
            args.append(self.term())

    def facts(self):
        while not self.at_end():
            line = self.line
            t = self.term()
            _, _, punct = self._next()
            if punct != ".":
                raise FactSyntaxError("fact not terminated by '.'", self.line)
            if isinstance(t, int):
                raise FactSyntaxError("a fact cannot be a number", line)
            name, args = (t, ()) if isinstance(t, str) else t
            yield line, name, args


def _name(arg, line, what="node"):
    if not isinstance(arg, str):
        raise FactSyntaxError(f"expected a {what} identifier, got {arg!r}", line)
    return arg


def _arity(name, args, n, line):
    if len(args) != n:
        raise FactSyntaxError(f"{name}/{len(args)} expects {n} arguments", line)


def _edge(args, line, nodes) -> Edge:
    x, y = _name(args[0], line), _name(args[1], line)
    for z in (x, y):
        if z not in nodes:
            raise UnknownNode(f"line {line}: {z}")
    if not x < y:
        raise NonCanonicalEdge(f"edge ({x},{y}) must satisfy {x} < {y}", line)
    return Edge(x, y)


def read_meta(text: str) -> dict:
    """Collect ``key=value`` pairs from ``% meta`` comment lines."""
    meta = {}
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("%") and s[1:].strip().startswith("meta"):
            for tok in s[1:].strip()[4:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
    return meta


# -- instances -----------------------------------------------------------------


def derive_diff(start: PowerGrid, target: PowerGrid):
    """(buildable, removable) = (target edges - start edges, start edges - target edges)."""
    if dict(start.nodes) != dict(target.nodes):
        raise NodeSetMismatch("start and target grids have different nodes")
    return (
        frozenset(e for e in target.edges if e not in start.edges),
        frozenset(e for e in start.edges if e not in target.edges),
    )


@dataclass(frozen=True)
class Instance:
    start: PowerGrid
    target: PowerGrid
    buildable: frozenset
    removable: frozenset

    @classmethod
    def from_grids(cls, start: PowerGrid, target: PowerGrid, check: bool = True) -> "Instance":
        b, r = derive_diff(start, target)
        if check:
            for which, g in (("start", start), ("target", target)):
                report = check_compliance(g)
                if not report.compliant:
                    raise ComplianceError(which, report)
        return cls(start, target, b, r)

    def __post_init__(self):
        b, r = derive_diff(self.start, self.target)
        if frozenset(self.buildable) != b or frozenset(self.removable) != r:
            raise DiffMismatch("buildable/removable sets differ from the start/target diff")
        object.__setattr__(self, "buildable", b)
        object.__setattr__(self, "removable", r)

    @property
    def nodes(self):
        return self.start.nodes


def _parse_facts(text: str, allowed: set):
    nodes = {}
    primaries = []
    edge_facts = {"start": {}, "target": {}, "buildable": {}, "must_remove": {}}
    deferred = []
    for line, name, args in _Scanner(text).facts():
        if name not in allowed:
            raise FactSyntaxError(f"unexpected predicate {name}/{len(args)}", line)
        if name == "node":
            _arity(name, args, 1, line)
            x = _name(args[0], line)
            if not re.match(r"^[a-z][a-z0-9_]*$", x):
                raise FactSyntaxError(f"invalid node identifier {x!r}", line)
            nodes[x] = NodeKind.SECONDARY
        else:
            deferred.append((line, name, args))
    for line, name, args in deferred:
        if name == "node_attr":
            _arity(name, args, 2, line)
            x = _name(args[0], line)
            if x not in nodes:
                raise UnknownNode(f"line {line}: {x}")
            if args[1] not in PRIMARY_ATTRS:
                raise FactSyntaxError(f"unknown node attribute {args[1]!r}", line)
            primaries.append(x)
            continue
        table = edge_facts[name]
        if name in ("start", "target"):
            _arity(name, args, 3, line)
            e = _edge(args, line, nodes)
            if args[2] not in ("open", "close"):
                raise FactSyntaxError(f"edge state must be open or close, got {args[2]!r}", line)
            value = EdgeState(args[2])
        else:
            _arity(name, args, 2, line)
            e = _edge(args, line, nodes)
            value = True
        if e in table:
            raise DuplicateEdge(f"{name} fact for {e} given twice", line)
        table[e] = value
    for x in primaries:
        nodes[x] = NodeKind.PRIMARY
    return nodes, edge_facts


def parse_grid(text: str) -> PowerGrid:
    """Parse a grid-only file (node, node_attr and start facts)."""
    nodes, facts = _parse_facts(text, {"node", "node_attr", "start"})
    return PowerGrid(nodes, facts["start"])


def parse_instance(text: str, permissive: bool = False) -> Instance:
    allowed = {"node", "node_attr", "start", "target", "buildable", "must_remove"}
    nodes, facts = _parse_facts(text, allowed)
    start = PowerGrid(nodes, facts["start"])
    target = PowerGrid(nodes, facts["target"])
    b, r = derive_diff(start, target)
    if facts["buildable"] and set(facts["buildable"]) != b:
        raise DiffMismatch("buildable facts differ from target minus start edges")
    if facts["must_remove"] and set(facts["must_remove"]) != r:
        raise DiffMismatch("must_remove facts differ from start minus target edges")
    return Instance.from_grids(start, target, check=not permissive)


def _grid_header(g: PowerGrid) -> list:
    lines = [" ".join(f"node({x})." for x in g.nodes)]
    if g.primaries:
        lines.append(" ".join(f"node_attr({x},is_primary)." for x in g.primaries))
    return lines


def serialize_grid(g: PowerGrid, predicate: str = "start") -> str:
    lines = _grid_header(g)
    lines += [f"{predicate}({e.u},{e.v},{s.value})." for e, s in g.edges.items()]
    return "\n".join(lines) + "\n"


def serialize_instance(inst: Instance, meta: dict | None = None) -> str:
    lines = []
    if meta:
        lines.append("% meta " + " ".join(f"{k}={v}" for k, v in meta.items()))
    lines += _grid_header(inst.start)
    lines += [f"start({e.u},{e.v},{s.value})." for e, s in inst.start.edges.items()]
    lines += [f"target({e.u},{e.v},{s.value})." for e, s in inst.target.edges.items()]
    lines += [f"buildable({e.u},{e.v})." for e in sorted(inst.buildable)]
    lines += [f"must_remove({e.u},{e.v})." for e in sorted(inst.removable)]
    return "\n".join(lines) + "\n"


# -- plans ---------------------------------------------------------------------


def _action(term, line):
    if not isinstance(term, tuple):
        raise FactSyntaxError(f"expected an action term, got {term!r}", line)
    name, args = term
    try:
        if name in ("add", "remove"):
            _arity(name, args, 2, line)
            x, y = _name(args[0], line), _name(args[1], line)
            if not x < y:
                raise NonCanonicalEdge(f"edge ({x},{y}) must satisfy {x} < {y}", line)
            e = Edge(x, y)
            return Add(e) if name == "add" else Remove(e)
        if name == "switch":
            _arity(name, args, 3, line)
            return Switch(*(_name(a, line) for a in args))
    except ValueError as exc:
        raise FactSyntaxError(str(exc), line) from exc
    raise FactSyntaxError(f"unknown action {name}/{len(args)}", line)


def parse_plan(text: str) -> Plan:
    steps = {}
    declared = set()
    for line, name, args in _Scanner(text).facts():
        if name == "time":
            _arity(name, args, 1, line)
            if not isinstance(args[0], int):
                raise FactSyntaxError("time point must be an integer", line)
            declared.add(args[0])
            continue
        if name != "action":
            raise FactSyntaxError(f"unexpected predicate {name}/{len(args)}", line)
        _arity(name, args, 2, line)
        t = args[0]
        if not isinstance(t, int) or t < 0:
            raise FactSyntaxError("time point must be a nonnegative integer", line)
        steps.setdefault(t, set()).add(_action(args[1], line))
    for t in sorted(declared):
        if t not in steps:
            raise EmptyStep(t)
    if steps and sorted(steps) != list(range(len(steps))):
        raise NonContiguousTime(f"time points {sorted(steps)} are not 0..{len(steps) - 1}")
    return Plan(tuple(steps[t] for t in range(len(steps))))


def serialize_plan(plan: Plan, header: str | None = None) -> str:
    lines = [f"% {header}"] if header else []
    for t, step in enumerate(plan.steps):
        if not step:
            raise EmptyStep(t)
        lines += [f"action({t},{a})." for a in sorted_actions(step)]
    return "\n".join(lines) + ("\n" if lines else "")


# -- DOT -----------------------------------------------------------------------


def export_dot(g: PowerGrid, name: str = "grid") -> str:
    """Graphviz rendering: primaries as boxes, closed lines solid, open lines dashed."""
    lines = [f"graph {name} {{"]
    for x, k in g.nodes.items():
        shape = "box" if k is NodeKind.PRIMARY else "circle"
        lines.append(f"  {x} [shape={shape}];")
    for e, s in g.edges.items():
        style = "solid" if s is EdgeState.CLOSE else "dashed"
        lines.append(f"  {e.u} -- {e.v} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_alpha(alpha) -> str:
    return str(Fraction(alpha))
