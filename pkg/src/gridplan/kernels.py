"""Array kernels for compliance checks and parallel step enumeration.

Grids are passed as flat arrays over a fixed edge universe:

* ``kind[n]``: 1 for primary nodes, 0 for secondaries
* ``eu[m]``, ``ev[m]``: endpoint indices of every universe edge
* ``state[m]``: ``ABSENT``, ``OPEN`` or ``CLOSE``

Actions are encoded as rows ``(code, e1, e2)`` where ``code`` is one of
``ADD``, ``REMOVE``, ``SWITCH``; ``e1`` is the affected edge for add/remove and
the closed edge of a switch, ``e2`` the open edge of a switch (``-1`` otherwise).
"""

import numpy as np

from ._jit import njit

ABSENT = 0
OPEN = 1
CLOSE = 2

ADD = 0
REMOVE = 1
SWITCH = 2


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def degrees(n, eu, ev, state):
    deg = np.zeros(n, dtype=np.int64)
    for i in range(eu.shape[0]):
        if state[i] != ABSENT:
            deg[eu[i]] += 1
            deg[ev[i]] += 1
    return deg


@njit(cache=True)
def degree_ok(kind, eu, ev, state):
    deg = degrees(kind.shape[0], eu, ev, state)
    for x in range(kind.shape[0]):
        if kind[x] == 0 and (deg[x] < 2 or deg[x] > 3):
            return False
    return True


@njit(cache=True)
def radial_uf(kind, eu, ev, state, owner):
    """Union-find radiality test; fills ``owner`` with each node's primary (-1 if none)."""
    n = kind.shape[0]
    parent = np.arange(n)
    for i in range(eu.shape[0]):
        if state[i] != CLOSE:
            continue
        ru = _find(parent, eu[i])
        rv = _find(parent, ev[i])
        if ru == rv:
            return False
        parent[ru] = rv
    root_primary = np.full(n, -1, dtype=np.int64)
    for p in range(n):
        if kind[p] == 1:
            r = _find(parent, p)
            if root_primary[r] != -1:
                return False
            root_primary[r] = p
    ok = True
    for x in range(n):
        owner[x] = root_primary[_find(parent, x)]
        if owner[x] == -1 and kind[x] == 0:
            ok = False
    return ok


@njit(cache=True)
def radial_count(kind, eu, ev, state):
    """Radiality via primary-rooted reachability plus the |V| - |P| closed-edge count."""
    n = kind.shape[0]
    m = eu.shape[0]
    start = np.zeros(n + 1, dtype=np.int64)
    n_closed = 0
    for i in range(m):
        if state[i] == CLOSE:
            start[eu[i] + 1] += 1
            start[ev[i] + 1] += 1
            n_closed += 1
    n_primary = 0
    for x in range(n):
        n_primary += kind[x]
    if n_closed != n - n_primary:
        return False
    for x in range(n):
        start[x + 1] += start[x]
    fill = start[:n].copy()
    adj = np.empty(2 * n_closed, dtype=np.int64)
    for i in range(m):
        if state[i] == CLOSE:
            adj[fill[eu[i]]] = ev[i]
            fill[eu[i]] += 1
            adj[fill[ev[i]]] = eu[i]
            fill[ev[i]] += 1
    label = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for p in range(n):
        if kind[p] != 1:
            continue
        label[p] = p
        head = 0
        tail = 1
        queue[0] = p
        while head < tail:
            x = queue[head]
            head += 1
            for k in range(start[x], start[x + 1]):
                y = adj[k]
                if kind[y] == 1 and y != p:
                    return False
                if label[y] == -1:
                    label[y] = p
                    queue[tail] = y
                    tail += 1
    for x in range(n):
        if kind[x] == 0 and label[x] == -1:
            return False
    return True


@njit(cache=True)
def redundancy_flags(kind, eu, ev, state, owner, out):
    """Mark secondaries with a secondary-only path to a primary other than ``owner``.

    Returns True when every secondary is marked. Entries of ``out`` for
    primaries are left True.
    """
    n = kind.shape[0]
    parent = np.arange(n)
    for i in range(eu.shape[0]):
        if state[i] != ABSENT and kind[eu[i]] == 0 and kind[ev[i]] == 0:
            ru = _find(parent, eu[i])
            rv = _find(parent, ev[i])
            if ru != rv:
                parent[ru] = rv
    first = np.full(n, -1, dtype=np.int64)
    multi = np.zeros(n, dtype=np.bool_)
    for i in range(eu.shape[0]):
        if state[i] == ABSENT:
            continue
        a = eu[i]
        b = ev[i]
        if kind[a] == kind[b]:
            continue
        if kind[a] == 1:
            p = a
            s = b
        else:
            p = b
            s = a
        r = _find(parent, s)
        if first[r] == -1:
            first[r] = p
        elif first[r] != p:
            multi[r] = True
    ok = True
    for x in range(n):
        if kind[x] == 1:
            out[x] = True
            continue
        r = _find(parent, x)
        out[x] = multi[r] or (first[r] != -1 and first[r] != owner[x])
        if not out[x]:
            ok = False
    return ok


@njit(cache=True)
def compliant(kind, eu, ev, state):
    if not degree_ok(kind, eu, ev, state):
        return False
    n = kind.shape[0]
    owner = np.empty(n, dtype=np.int64)
    if not radial_uf(kind, eu, ev, state, owner):
        return False
    flags = np.empty(n, dtype=np.bool_)
    return redundancy_flags(kind, eu, ev, state, owner, flags)


@njit(cache=True)
def needy(c, t, is_r):
    """Whether an edge in state ``c`` must still be flipped an odd number of times."""
    if is_r:
        return c == CLOSE
    if c == ABSENT:
        return t == CLOSE
    return c != t


@njit(cache=True)
def needy_count(state, target, is_r):
    m = 0
    for i in range(state.shape[0]):
        if needy(state[i], target[i], is_r[i]):
            m += 1
    return m


@njit(cache=True)
def pending_edits(state, target, is_b, is_r):
    k = 0
    for i in range(state.shape[0]):
        if (is_b[i] and state[i] == ABSENT) or (is_r[i] and state[i] != ABSENT):
            k += 1
    return k


@njit(cache=True)
def _shares_secondary(kind, eu, ev, i, j):
    a = eu[i]
    b = ev[i]
    c = eu[j]
    d = ev[j]
    if (a == c or a == d) and kind[a] == 0:
        return True
    if (b == c or b == d) and kind[b] == 0:
        return True
    return False


@njit(cache=True)
def last_step_switches(kind, eu, ev, state, target, is_b, is_r):
    """Switches in the unique-up-to-pairing single step from ``state`` to ``target``, or -1."""
    m = state.shape[0]
    closing = np.empty(m, dtype=np.int64)
    opening = np.empty(m, dtype=np.int64)
    nc = 0
    no = 0
    for i in range(m):
        c = state[i]
        t = target[i]
        if is_r[i]:
            t = ABSENT
        if c == t:
            continue
        if c == ABSENT:
            if t != OPEN or not is_b[i]:
                return -1
        elif t == ABSENT:
            if c != OPEN or not is_r[i]:
                return -1
        elif c == CLOSE:
            closing[nc] = i
            nc += 1
        else:
            opening[no] = i
            no += 1
    if nc != no:
        return -1
    match_o = np.full(no, -1, dtype=np.int64)
    match_c = np.full(nc, -1, dtype=np.int64)
    parent = np.empty(no, dtype=np.int64)
    seen = np.zeros(no, dtype=np.bool_)
    queue = np.empty(nc, dtype=np.int64)
    for root in range(nc):
        seen[:] = False
        head = 0
        tail = 1
        queue[0] = root
        found = -1
        while head < tail and found < 0:
            cc = queue[head]
            head += 1
            for o in range(no):
                if seen[o] or not _shares_secondary(kind, eu, ev, closing[cc], opening[o]):
                    continue
                seen[o] = True
                parent[o] = cc
                if match_o[o] == -1:
                    found = o
                    break
                queue[tail] = match_o[o]
                tail += 1
        if found < 0:
            return -1
        o = found
        while True:
            cc = parent[o]
            nxt = match_c[cc]
            match_c[cc] = o
            match_o[o] = cc
            if cc == root:
                break
            o = nxt
    return nc


@njit(cache=True)
def steps_lower_bound(kind, eu, ev, state, target, is_b, is_r, sequential):
    """Admissible bound on the number of steps still needed to reach ``target``."""
    if sequential:
        return pending_edits(state, target, is_b, is_r) + needy_count(state, target, is_r) // 2
    same = True
    for i in range(state.shape[0]):
        t = ABSENT if is_r[i] else target[i]
        if state[i] != t:
            same = False
            break
    if same:
        return 0
    for i in range(state.shape[0]):
        if is_b[i] and state[i] == ABSENT and target[i] == CLOSE:
            return 2
        if is_r[i] and state[i] == CLOSE:
            return 2
    if last_step_switches(kind, eu, ev, state, target, is_b, is_r) < 0:
        return 2
    return 1


@njit(cache=True)
def candidate_actions(kind, eu, ev, state, is_b, is_r, inc_ptr, inc_edge, inc_other):
    """Applicable actions in canonical order as rows ``(code, e1, e2, pivot, from, to)``.

    Adds are restricted to buildable edges and removes to removable ones.
    ``inc_*`` is a CSR incidence list with neighbours sorted by node index.
    """
    m = state.shape[0]
    n = kind.shape[0]
    out = np.empty((m + 4 * m + 1, 6), dtype=np.int64)
    k = 0
    for i in range(m):
        if is_b[i] and state[i] == ABSENT:
            out[k, 0] = ADD
            out[k, 1] = i
            out[k, 2] = -1
            out[k, 3] = -1
            out[k, 4] = eu[i]
            out[k, 5] = ev[i]
            k += 1
    for i in range(m):
        if is_r[i] and state[i] == OPEN:
            out[k, 0] = REMOVE
            out[k, 1] = i
            out[k, 2] = -1
            out[k, 3] = -1
            out[k, 4] = eu[i]
            out[k, 5] = ev[i]
            k += 1
    for x in range(n):
        if kind[x] != 0:
            continue
        for p in range(inc_ptr[x], inc_ptr[x + 1]):
            if state[inc_edge[p]] != CLOSE:
                continue
            for q in range(inc_ptr[x], inc_ptr[x + 1]):
                if state[inc_edge[q]] != OPEN:
                    continue
                if k == out.shape[0]:
                    grown = np.empty((2 * k, 6), dtype=np.int64)
                    grown[:k] = out[:k]
                    out = grown
                out[k, 0] = SWITCH
                out[k, 1] = inc_edge[p]
                out[k, 2] = inc_edge[q]
                out[k, 3] = x
                out[k, 4] = inc_other[p]
                out[k, 5] = inc_other[q]
                k += 1
    return out[:k]


@njit(cache=True)
def apply_rows(state, actions, rows):
    """Return a copy of ``state`` with the given action rows applied."""
    out = state.copy()
    for k in range(rows.shape[0]):
        j = rows[k]
        code = actions[j, 0]
        if code == ADD:
            out[actions[j, 1]] = OPEN
        elif code == REMOVE:
            out[actions[j, 1]] = ABSENT
        else:
            out[actions[j, 1]] = OPEN
            out[actions[j, 2]] = CLOSE
    return out


@njit(cache=True)
def _degree_final_ok(kind, deg, last_touch, upto):
    for x in range(kind.shape[0]):
        if kind[x] == 0 and last_touch[x] < upto and (deg[x] < 2 or deg[x] > 3):
            return False
    return True


@njit(cache=True)
def enumerate_steps(kind, eu, ev, state, target, is_b, is_r, actions, slack, max_size, remaining, sequential, limit):
    """Enumerate nonempty compatible action subsets leading to useful compliant states.

    Subsets are produced in lexicographic order of their sorted row indices.
    Each switch costs ``1 + delta`` against ``slack`` where ``delta`` is the
    change of the switch lower bound it causes; adds and removes are free.
    Children from which ``target`` is provably out of reach within
    ``remaining - 1`` further steps are dropped.

    Returns ``(members, sizes, states, spent, count, truncated)`` where
    ``spent[k]`` is the number of switches in subset ``k``.
    """
    a = actions.shape[0]
    m = state.shape[0]
    n = kind.shape[0]
    cap = 16
    width = max(a, 1)
    members = np.empty((cap, width), dtype=np.int64)
    sizes = np.empty(cap, dtype=np.int64)
    spent = np.empty(cap, dtype=np.int64)
    states = np.empty((cap, m), dtype=state.dtype)
    count = 0
    truncated = False
    if a == 0:
        return members[:0], sizes[:0], states[:0], spent[:0], 0, False
    # a switch costs 1 + delta, i.e. 2 minus the number of needy edges it flips
    weight = np.zeros(a, dtype=np.int64)
    for j in range(a):
        if actions[j, 0] == SWITCH:
            nd = 0
            for e in (actions[j, 1], actions[j, 2]):
                if needy(state[e], target[e], is_r[e]):
                    nd += 1
            weight[j] = 2 - nd
    last_touch = np.full(n, -1, dtype=np.int64)
    for j in range(a):
        if actions[j, 0] != SWITCH:
            e = actions[j, 1]
            last_touch[eu[e]] = j
            last_touch[ev[e]] = j
    deg = degrees(n, eu, ev, state)
    used = np.zeros(m, dtype=np.int64)
    stack = np.empty(a, dtype=np.int64)
    cur = state.copy()
    depth = 0
    spent_w = 0
    nsw = 0
    nxt = 0
    while True:
        j = nxt
        while j < a:
            if depth < max_size and used[actions[j, 1]] == 0 and (actions[j, 2] < 0 or used[actions[j, 2]] == 0):
                if spent_w + weight[j] <= slack:
                    break
            j += 1
        if j < a and not _degree_final_ok(kind, deg, last_touch, j):
            j = a
        if j < a:
            stack[depth] = j
            depth += 1
            code = actions[j, 0]
            e1 = actions[j, 1]
            if code == ADD:
                cur[e1] = OPEN
                deg[eu[e1]] += 1
                deg[ev[e1]] += 1
            elif code == REMOVE:
                cur[e1] = ABSENT
                deg[eu[e1]] -= 1
                deg[ev[e1]] -= 1
            else:
                cur[e1] = OPEN
                cur[actions[j, 2]] = CLOSE
                used[actions[j, 2]] += 1
                nsw += 1
            used[e1] += 1
            spent_w += weight[j]
            ok = compliant(kind, eu, ev, cur)
            if ok:
                if remaining <= 1:
                    for i in range(m):
                        t = ABSENT if is_r[i] else target[i]
                        if cur[i] != t:
                            ok = False
                            break
                elif steps_lower_bound(kind, eu, ev, cur, target, is_b, is_r, sequential) > remaining - 1:
                    ok = False
            if ok:
                if count == limit:
                    truncated = True
                    break
                if count == cap:
                    cap *= 2
                    nm = np.empty((cap, width), dtype=np.int64)
                    nm[:count] = members[:count]
                    members = nm
                    ns = np.empty(cap, dtype=np.int64)
                    ns[:count] = sizes[:count]
                    sizes = ns
                    nsp = np.empty(cap, dtype=np.int64)
                    nsp[:count] = spent[:count]
                    spent = nsp
                    nst = np.empty((cap, m), dtype=state.dtype)
                    nst[:count] = states[:count]
                    states = nst
                for k in range(depth):
                    members[count, k] = stack[k]
                sizes[count] = depth
                spent[count] = nsw
                states[count] = cur
                count += 1
            nxt = j + 1
            continue
        if depth == 0:
            break
        depth -= 1
        j = stack[depth]
        code = actions[j, 0]
        e1 = actions[j, 1]
        if code == ADD:
            cur[e1] = ABSENT
            deg[eu[e1]] -= 1
            deg[ev[e1]] -= 1
        elif code == REMOVE:
            cur[e1] = OPEN
            deg[eu[e1]] += 1
            deg[ev[e1]] += 1
        else:
            cur[e1] = CLOSE
            cur[actions[j, 2]] = OPEN
            used[actions[j, 2]] -= 1
            nsw -= 1
        used[e1] -= 1
        spent_w -= weight[j]
        nxt = j + 1
    return members[:count], sizes[:count], states[:count], spent[:count], count, truncated
