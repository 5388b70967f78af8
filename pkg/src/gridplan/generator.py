"""Synthetic LPP instances: secured-feeder grids plus compliance-preserving random walks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .compliance import is_compliant
from .grid import Add, Edge, EdgeState, NodeKind, Plan, PowerGrid, Remove, Switch, apply_action
from .instance_io import Instance

DEFAULT_ALPHAS = (Fraction(1, 5), Fraction(3, 5), Fraction(1), Fraction(7, 5), Fraction(9, 5))
DEFAULT_SIZES = (8, 12, 15, 18, 22, 30, 40, 50)
RETRIES = 32


class GenerationFailed(Exception):
    pass


class DeadEnd(Exception):
    def __init__(self, steps_done: int):
        super().__init__(f"no compliance-preserving action after {steps_done} steps")
        self.steps_done = steps_done


@dataclass(frozen=True)
class GenConfig:
    num_nodes: int
    num_primaries: int = 2
    alpha: Fraction = Fraction(1)
    seed: int = 0
    feeders: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(str(self.alpha)) if isinstance(self.alpha, float) else Fraction(self.alpha))
        if self.num_primaries < 2:
            raise ValueError("num_primaries must be at least 2")
        if self.num_nodes < self.num_primaries + 2:
            raise ValueError("num_nodes must be at least num_primaries + 2")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        n_sec = self.num_nodes - self.num_primaries
        if self.feeders is not None and not (2 * self.feeders <= n_sec <= 6 * self.feeders):
            raise ValueError(f"{self.feeders} feeders cannot hold {n_sec} secondaries with 2..6 each")

    @property
    def num_secondaries(self) -> int:
        return self.num_nodes - self.num_primaries

    @property
    def num_feeders(self) -> int:
        if self.feeders is not None:
            return self.feeders
        n = self.num_secondaries
        return min(max(math.ceil(n / 4), math.ceil(n / 6)), n // 2)


@dataclass(frozen=True)
class GeneratedInstance:
    instance: Instance
    witness: Plan
    g: int
    config: GenConfig

    @property
    def meta(self) -> dict:
        return {"g": self.g, "alpha": str(self.config.alpha), "seed": self.config.seed}


def _feeder_sizes(n_sec: int, f: int, rng) -> list:
    sizes = [2] * f
    for _ in range(n_sec - 2 * f):
        room = [i for i in range(f) if sizes[i] < 6]
        sizes[room[rng.integers(len(room))]] += 1
    return sizes


def generate_grid(cfg: GenConfig, rng) -> PowerGrid:
    """Random secured-feeder grid: primary-to-primary paths with one open line each, plus open ties."""
    prims = [f"p{i + 1}" for i in range(cfg.num_primaries)]
    secs = [f"s{i + 1}" for i in range(cfg.num_secondaries)]
    nodes = {x: NodeKind.PRIMARY for x in prims}
    nodes.update({x: NodeKind.SECONDARY for x in secs})
    for _ in range(RETRIES):
        order = [secs[i] for i in rng.permutation(len(secs))]
        edges = {}
        feeder_of = {}
        pos = 0
        for k, size in enumerate(_feeder_sizes(len(secs), cfg.num_feeders, rng)):
            members = order[pos : pos + size]
            pos += size
            a, b = rng.choice(len(prims), size=2, replace=False)
            path = [prims[a], *members, prims[b]]
            nos = rng.integers(len(path) - 1)
            for i in range(len(path) - 1):
                edges[Edge.of(path[i], path[i + 1])] = EdgeState.OPEN if i == nos else EdgeState.CLOSE
            for s in members:
                feeder_of[s] = k
        deg = {x: 0 for x in nodes}
        for e in edges:
            deg[e.u] += 1
            deg[e.v] += 1
        n_ties = int(rng.integers(cfg.num_feeders)) if cfg.num_feeders > 1 else 0
        for _ in range(4 * n_ties):
            if n_ties == 0:
                break
            x, y = (secs[i] for i in rng.choice(len(secs), size=2, replace=False))
            e = Edge.of(x, y)
            if feeder_of[x] == feeder_of[y] or e in edges or deg[x] >= 3 or deg[y] >= 3:
                continue
            edges[e] = EdgeState.OPEN
            deg[x] += 1
            deg[y] += 1
            n_ties -= 1
        g = PowerGrid(nodes, edges)
        if is_compliant(g):
            return g
    raise GenerationFailed(f"no compliant grid for {cfg}")


def _walk_candidates(g: PowerGrid, added: set, removed: set, last):
    switches = []
    for x in g.secondaries:
        inc = g.incident(x)
        closed = [e.other(x) for e in inc if g.edges[e] is EdgeState.CLOSE]
        opened = [e.other(x) for e in inc if g.edges[e] is EdgeState.OPEN]
        for y in closed:
            for z in opened:
                a = Switch(x, y, z)
                if last is None or a != last.inverse:
                    switches.append(a)
    ids = list(g.nodes)
    deg = {x: g.degree(x) for x in ids}
    adds = []
    for i, x in enumerate(ids):
        for y in ids[i + 1 :]:
            if g.is_primary(x) and g.is_primary(y):
                continue
            e = Edge.of(x, y)
            if e in g.edges or e in removed:
                continue
            if any(not g.is_primary(z) and deg[z] >= 3 for z in (x, y)):
                continue
            adds.append(Add(e))
    removes = [Remove(e) for e in g.open_edges() if e not in added]
    return [switches, adds, removes]


def random_compliant_walk(g0: PowerGrid, depth: int, rng):
    """Sequential walk of ``depth`` compliance-preserving actions from ``g0``.

    Each step picks an action kind uniformly among kinds that still have a
    compliant candidate, then a candidate uniformly within that kind. Added
    edges are never removed, removed edges never re-added, and a switch is
    never followed by its inverse.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    g = g0
    added, removed = set(), set()
    steps = []
    last = None
    for t in range(depth):
        kinds = [c for c in _walk_candidates(g, added, removed, last) if c]
        chosen = None
        while kinds and chosen is None:
            pool = kinds.pop(int(rng.integers(len(kinds))))
            for i in rng.permutation(len(pool)):
                nxt = apply_action(g, pool[i])
                if is_compliant(nxt):
                    chosen = pool[i]
                    break
        if chosen is None:
            raise DeadEnd(t)
        g = nxt
        if isinstance(chosen, Add):
            added.add(chosen.edge)
        elif isinstance(chosen, Remove):
            removed.add(chosen.edge)
        last = chosen if isinstance(chosen, Switch) else None
        steps.append(frozenset([chosen]))
    return Plan(tuple(steps)), g


def generate_instance(cfg: GenConfig, rng=None) -> GeneratedInstance:
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    for _ in range(RETRIES):
        g0 = generate_grid(cfg, rng)
        depth = math.ceil(cfg.alpha * len(g0.edges))
        try:
            witness, gt = random_compliant_walk(g0, depth, rng)
        except DeadEnd:
            continue
        inst = Instance.from_grids(g0, gt)
        return GeneratedInstance(inst, witness, depth, cfg)
    raise GenerationFailed(f"random walks kept dead-ending for {cfg}")


def generate_batch(sizes, alphas, seeds, num_primaries: int = 2) -> list:
    return [
        generate_instance(GenConfig(n, num_primaries, alpha, seed))
        for n in sizes
        for alpha in alphas
        for seed in seeds
    ]
