"""Slow, direct re-statements of the grid rules used as test oracles.

Nothing here touches the array kernels.
"""

from gridplan.grid import EdgeState, NodeKind


def _closed_adj(g):
    adj = {x: set() for x in g.nodes}
    for e, s in g.edges.items():
        if s is EdgeState.CLOSE:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
    return adj


def _components(adj):
    seen, comps = set(), []
    for r in adj:
        if r in seen:
            continue
        comp, stack = [], [r]
        seen.add(r)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x] - seen:
                seen.add(y)
                stack.append(y)
        comps.append(comp)
    return comps


def ref_owner(g):
    """Map node -> primary of its closed component, or None if the grid is not radial."""
    adj = _closed_adj(g)
    owner = {}
    for comp in _components(adj):
        edges = sum(len(adj[x]) for x in comp) // 2
        if edges != len(comp) - 1:
            return None  # cycle
        prims = [x for x in comp if g.nodes[x] is NodeKind.PRIMARY]
        if len(prims) > 1:
            return None
        if not prims:
            return None  # only secondaries here, none supplied
        for x in comp:
            owner[x] = prims[0]
    return owner


def ref_radial(g) -> bool:
    return ref_owner(g) is not None


def ref_redundant(g, s) -> bool:
    """Explicit simple-path search over all edges; internal nodes must be secondary."""
    owner = ref_owner(g)[s]
    adj = {x: set() for x in g.nodes}
    for e in g.edges:
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)

    def walk(x, visited):
        for y in adj[x]:
            if y in visited:
                continue
            if g.nodes[y] is NodeKind.PRIMARY:
                if y != owner:
                    return True
                continue
            if walk(y, visited | {y}):
                return True
        return False

    return walk(s, {s})


def ref_degree_ok(g) -> bool:
    deg = {x: 0 for x in g.nodes}
    for e in g.edges:
        deg[e.u] += 1
        deg[e.v] += 1
    return all(2 <= deg[x] <= 3 for x, k in g.nodes.items() if k is NodeKind.SECONDARY)


def ref_compliant(g) -> bool:
    if not ref_radial(g):
        return False
    secs = [x for x, k in g.nodes.items() if k is NodeKind.SECONDARY]
    return ref_degree_ok(g) and all(ref_redundant(g, s) for s in secs)
