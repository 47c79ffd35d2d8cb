"""Slow, independent reference implementations used by the tests.

Nothing here imports the solver internals; each oracle works from the
definitions directly (enumeration, Floyd-Warshall, naive set merging).
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def floyd_warshall(vertex_count, edges):
    D = np.full((vertex_count, vertex_count), np.inf)
    np.fill_diagonal(D, 0.0)
    for u, v, w in edges:
        D[u, v] = min(D[u, v], w)
        D[v, u] = min(D[v, u], w)
    for k in range(vertex_count):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return D


def df_by_paths(values, edges, x, y):
    """``f(x) + f(y) - 2 max_paths min_path f`` by enumerating simple paths."""
    n = len(values)
    nbrs = [[] for _ in range(n)]
    for u, v, _ in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    best = -math.inf

    def walk(v, seen, low):
        nonlocal best
        low = min(low, values[v])
        if v == y:
            best = max(best, low)
            return
        for u in nbrs[v]:
            if u not in seen:
                seen.add(u)
                walk(u, seen, low)
                seen.remove(u)

    walk(x, {x}, math.inf)
    return values[x] + values[y] - 2 * best


def naive_elder(values, edges):
    """Bars ``(birth, death)`` of the superlevel filtration, essential death None.

    Components are explicit Python sets; ties are processed by vertex id and
    the surviving component is the one with the higher (older) birth, then the
    smaller birth vertex.  Zero-length bars are dropped.
    """
    n = len(values)
    nbrs = [[] for _ in range(n)]
    for u, v, _ in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    order = sorted(range(n), key=lambda v: (-values[v], v))
    comps = []          # list of [set, birth, birth_vertex]
    bars = []
    for v in order:
        touching = [c for c in comps if any(u in c[0] for u in nbrs[v])]
        if not touching:
            comps.append([{v}, values[v], v])
            continue
        touching.sort(key=lambda c: (-c[1], c[2]))
        keep = touching[0]
        keep[0].add(v)
        for c in touching[1:]:
            if c[1] > values[v]:
                bars.append((c[1], values[v]))
            keep[0] |= c[0]
            comps.remove(c)
    assert len(comps) == 1
    bars.append((comps[0][1], None))
    return sorted(bars, key=lambda b: (b[0], -math.inf if b[1] is None else b[1]))


def _partial_matchings(n, m):
    """All injective partial maps from range(n) into range(m)."""
    def rec(i, used):
        if i == n:
            yield ()
            return
        for rest in rec(i + 1, used):
            yield (None,) + rest
        for j in range(m):
            if j not in used:
                for rest in rec(i + 1, used | {j}):
                    yield (j,) + rest
    yield from rec(0, frozenset())


def _match_costs(P, Q):
    P, Q = np.asarray(P, float).reshape(-1, 2), np.asarray(Q, float).reshape(-1, 2)
    cross = np.max(np.abs(P[:, None, :] - Q[None, :, :]), axis=2) if len(P) and len(Q) \
        else np.zeros((len(P), len(Q)))
    return cross, (P[:, 1] - P[:, 0]) / 2, (Q[:, 1] - Q[:, 0]) / 2


def wasserstein_by_enumeration(P, Q, p):
    """``d_p`` between unit-mass diagrams by trying every partial matching."""
    cross, dp, dq = _match_costs(P, Q)
    best = math.inf
    for sigma in _partial_matchings(len(dp), len(dq)):
        matched = {j for j in sigma if j is not None}
        total = sum(cross[i, j] ** p if j is not None else dp[i] ** p
                    for i, j in enumerate(sigma))
        total += sum(dq[j] ** p for j in range(len(dq)) if j not in matched)
        best = min(best, total)
    return best ** (1.0 / p)


def bottleneck_by_enumeration(P, Q):
    cross, dp, dq = _match_costs(P, Q)
    best = math.inf
    for sigma in _partial_matchings(len(dp), len(dq)):
        matched = {j for j in sigma if j is not None}
        worst = max([cross[i, j] if j is not None else dp[i] for i, j in enumerate(sigma)]
                    + [dq[j] for j in range(len(dq)) if j not in matched] + [0.0])
        best = min(best, worst)
    return best


def p_variation_by_partitions(x, p):
    """Supremum over all partitions, by enumerating subsets of interior points.

    Both endpoints can always be added to a partition (that only appends
    nonnegative terms), so only the interior points are enumerated.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    best = 0.0
    for k in range(n - 1):
        for inner in itertools.combinations(range(1, n - 1), k):
            idx = (0, *inner, n - 1)
            best = max(best, float(np.sum(np.abs(np.diff(x[list(idx)])) ** p)))
    return best ** (1.0 / p)


def _suppressed_children(values, parent):
    n = len(values)
    kids = [[] for _ in range(n)]
    root = None
    for v, p in enumerate(parent):
        if p < 0:
            root = v
        else:
            kids[p].append(v)

    def skip(v):
        while len(kids[v]) == 1:
            v = kids[v][0]
        return v

    return root, kids, skip


def isometric(t1, t2) -> bool:
    """Root- and value-preserving isomorphism by backtracking over children.

    Degree-two nodes are skipped on the fly, so trees that differ only by
    subdividing vertices compare equal.
    """
    r1, k1, skip1 = _suppressed_children(t1.values, t1.parent)
    r2, k2, skip2 = _suppressed_children(t2.values, t2.parent)
    v1, v2 = t1.values, t2.values

    def kids(k, skip, v):
        return [skip(c) for c in k[v]]

    def same(a, b):
        if v1[a] != v2[b]:
            return False
        ca, cb = kids(k1, skip1, a), kids(k2, skip2, b)
        if len(ca) != len(cb):
            return False
        return match(ca, cb)

    def match(ca, cb):
        if not ca:
            return True
        head, rest = ca[0], ca[1:]
        for i, c in enumerate(cb):
            if same(head, c) and match(rest, cb[:i] + cb[i + 1:]):
                return True
        return False

    # the root is kept even when it has a single child
    return v1[r1] == v2[r2] and len(k1[r1]) == len(k2[r2]) and \
        match(kids(k1, skip1, r1), kids(k2, skip2, r2))
