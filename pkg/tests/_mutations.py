"""Plan mutations that a sound validator must reject.

Each function returns a mutated plan, or None when the plan offers nothing to
mutate for that class.
"""

import itertools

from gridplan.grid import Add, Edge, Plan, Switch, affected_edges


def _steps(plan):
    return [set(s) for s in plan.steps]


def delete_action(plan, rng):
    slots = [(i, a) for i, s in enumerate(plan.steps) for a in sorted(s, key=str)]
    if not slots:
        return None
    i, a = slots[rng.integers(len(slots))]
    steps = _steps(plan)
    steps[i].discard(a)
    return Plan(tuple(s for s in steps if s))


def duplicate_step(plan, rng):
    if not plan.steps:
        return None
    i = int(rng.integers(len(plan.steps)))
    steps = _steps(plan)
    return Plan(tuple(steps[: i + 1] + [set(steps[i])] + steps[i + 1 :]))


def swap_dependent_steps(plan, rng):
    """Swap adjacent steps i, i+1 that share an affected edge."""
    pairs = []
    for i in range(len(plan.steps) - 1):
        a = set().union(*(affected_edges(x) for x in plan.steps[i]))
        b = set().union(*(affected_edges(x) for x in plan.steps[i + 1]))
        if a & b:
            pairs.append(i)
    if not pairs:
        return None
    i = pairs[rng.integers(len(pairs))]
    steps = _steps(plan)
    steps[i], steps[i + 1] = steps[i + 1], steps[i]
    return Plan(tuple(steps))


def reverse_switch(plan, rng):
    slots = [(i, a) for i, s in enumerate(plan.steps) for a in sorted(s, key=str) if isinstance(a, Switch)]
    if not slots:
        return None
    i, a = slots[rng.integers(len(slots))]
    steps = _steps(plan)
    steps[i].discard(a)
    steps[i].add(a.inverse)
    return Plan(tuple(steps))


def retarget_add(plan, rng, inst):
    slots = [(i, a) for i, s in enumerate(plan.steps) for a in sorted(s, key=str) if isinstance(a, Add)]
    if not slots:
        return None
    i, a = slots[rng.integers(len(slots))]
    nodes = sorted(inst.start.nodes)
    options = [
        Edge(x, y)
        for x, y in itertools.combinations(nodes, 2)
        if Edge(x, y) not in inst.buildable and Edge(x, y) not in inst.start.edges
    ]
    if not options:
        return None
    steps = _steps(plan)
    steps[i].discard(a)
    steps[i].add(Add(options[rng.integers(len(options))]))
    return Plan(tuple(steps))


MUTATIONS = {
    "delete_action": lambda p, rng, inst: delete_action(p, rng),
    "duplicate_step": lambda p, rng, inst: duplicate_step(p, rng),
    "swap_dependent_steps": lambda p, rng, inst: swap_dependent_steps(p, rng),
    "reverse_switch": lambda p, rng, inst: reverse_switch(p, rng),
    "retarget_add": retarget_add,
}
