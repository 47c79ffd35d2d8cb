"""Merge trees of scalar fields under the superlevel filtration.

The H0 pseudo-distance ``d_f(x, y) = f(x) + f(y) - 2 W(x, y)``, where ``W`` is
the best achievable minimum of ``f`` along a path from x to y, collapses to a
rooted R-tree ``T_f``.  Node values are filtration heights: the root carries
``min f`` and every child sits strictly above its parent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ._errors import InvalidInputError
from .domain import MetricGraph, ScalarField, path_graph_from_spacings

__all__ = [
    "MergeTree",
    "MarkedInterval",
    "df_distance",
    "df_matrix",
    "build_merge_tree",
    "height_above",
    "trim",
    "leaf_count",
    "total_length",
    "dyck_path",
    "compose_intervals",
    "approximate_from_tree",
    "approximant_interval_lengths",
    "canonical_form",
    "distortion_bound",
    "random_merge_tree",
    "unit_edge_tree",
    "cascade_tree",
]


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root


class MergeTree:
    """Finite rooted tree with strictly increasing values away from the root.

    Parameters
    ----------
    values : array of node values.
    parent : array of parent ids, ``-1`` for the root.
    vertex_node, vertex_value : optional positions of the sampled vertices
        of the source field; vertex ``x`` projects to the point at height
        ``vertex_value[x]`` on the edge below node ``vertex_node[x]``.
    """

    def __init__(self, values, parent, vertex_node=None, vertex_value=None,
                 resolution=None):
        values = np.array(values, dtype=float).reshape(-1)
        parent = np.array(parent, dtype=int).reshape(-1)
        if values.shape != parent.shape or values.size == 0:
            raise InvalidInputError("values and parent must be non-empty and aligned")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("node values must be finite")
        roots = np.flatnonzero(parent < 0)
        if roots.size != 1:
            raise InvalidInputError(f"expected exactly one root, found {roots.size}")
        n = values.size
        if np.any(parent >= n):
            raise InvalidInputError("parent id out of range")
        nonroot = parent >= 0
        if np.any(values[nonroot] <= values[parent[nonroot]]):
            raise InvalidInputError("every child must sit strictly above its parent")
        # strict increase along parent links rules out cycles
        self.values = values
        self.parent = parent
        self.root = int(roots[0])
        self.values.setflags(write=False)
        self.parent.setflags(write=False)
        if vertex_node is not None:
            vertex_node = np.asarray(vertex_node, dtype=int)
            vertex_value = np.asarray(vertex_value, dtype=float)
        self.vertex_node = vertex_node
        self.vertex_value = vertex_value
        # rms value jump across edges of the source field, if known
        self.resolution = resolution

    # --- structure -----------------------------------------------------

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return (f"MergeTree(nodes={len(self)}, leaves={len(self.leaves)}, "
                f"range=({self.values.min():.6g}, {self.values.max():.6g}))")

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(len(self))]
        for v, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def leaves(self) -> np.ndarray:
        counts = np.bincount(self.parent[self.parent >= 0], minlength=len(self))
        is_leaf = counts == 0
        if len(self) > 1:
            is_leaf[self.root] = False
        return np.flatnonzero(is_leaf)

    @cached_property
    def bottom_up(self) -> np.ndarray:
        """Node ids ordered so every child precedes its parent."""
        return np.argsort(-self.values, kind="stable")

    @cached_property
    def subtree_max(self) -> np.ndarray:
        H = self.values.copy()
        for v in self.bottom_up:
            p = self.parent[v]
            if p >= 0 and H[v] > H[p]:
                H[p] = H[v]
        return H

    @cached_property
    def heights(self) -> np.ndarray:
        """Height of tree above each node, ``subtree_max - value``."""
        return self.subtree_max - self.values

    @cached_property
    def parent_values(self) -> np.ndarray:
        pv = np.where(self.parent >= 0, self.values[np.maximum(self.parent, 0)], np.nan)
        pv[self.root] = self.values[self.root]
        return pv

    @cached_property
    def depth(self) -> np.ndarray:
        d = np.zeros(len(self), dtype=int)
        for v in self.bottom_up[::-1]:
            p = self.parent[v]
            if p >= 0:
                d[v] = d[p] + 1
        return d

    @property
    def range(self) -> tuple[float, float]:
        return float(self.values[self.root]), float(self.values.max())

    def edge_lengths(self) -> np.ndarray:
        return self.values - self.parent_values

    @cached_property
    def canonical_children(self) -> tuple[tuple[int, ...], ...]:
        """Children ordered by (subtree max, canonical encoding)."""
        enc = self._encodings
        H = self.subtree_max
        return tuple(tuple(sorted(kids, key=lambda c: (H[c], enc[c])))
                     for kids in self.children)

    @cached_property
    def _encodings(self) -> list[bytes]:
        enc: list[bytes] = [b""] * len(self)
        H = self.subtree_max
        for v in self.bottom_up:
            kids = sorted(self.children[v], key=lambda c: (H[c], enc[c]))
            enc[v] = (b"(" + float(self.values[v]).hex().encode()
                      + b":" + b",".join(enc[c] for c in kids) + b")")
        return enc

    def normalized(self) -> "MergeTree":
        """Copy with degree-two non-root nodes suppressed."""
        return _suppress(self.values, self.parent, self.vertex_node, self.vertex_value)

    # --- metric --------------------------------------------------------

    def lca(self, u: int, v: int) -> int:
        depth, parent = self.depth, self.parent
        while depth[u] > depth[v]:
            u = parent[u]
        while depth[v] > depth[u]:
            v = parent[v]
        while u != v:
            u, v = parent[u], parent[v]
        return int(u)

    def node_distance(self, u: int, v: int) -> float:
        m = self.lca(u, v)
        return float(self.values[u] + self.values[v] - 2 * self.values[m])

    def point_distance(self, a: tuple[int, float], b: tuple[int, float]) -> float:
        """Distance between points given as ``(node, height)`` on the edge below node."""
        (na, va), (nb, vb) = a, b
        m = self.lca(na, nb)
        if m == na or m == nb:
            meet = min(va, vb)
        else:
            meet = self.values[m]
        return float(va + vb - 2 * meet)

    def vertex_distance(self, x: int, y: int) -> float:
        if self.vertex_node is None:
            raise InvalidInputError("tree carries no vertex positions")
        return self.point_distance((self.vertex_node[x], self.vertex_value[x]),
                                   (self.vertex_node[y], self.vertex_value[y]))

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "nodes": [{"id": i, "value": float(v),
                       "parent": (int(p) if p >= 0 else None)}
                      for i, (v, p) in enumerate(zip(self.values, self.parent))],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MergeTree":
        nodes = data["nodes"]
        ids = {node["id"]: i for i, node in enumerate(nodes)}
        if len(ids) != len(nodes):
            raise InvalidInputError("duplicate node ids")
        values = [node["value"] for node in nodes]
        try:
            parent = [-1 if node.get("parent") is None else ids[node["parent"]]
                      for node in nodes]
        except KeyError as exc:
            raise InvalidInputError(f"unknown parent id {exc}") from None
        tree = cls(values, parent)
        if "root" in data and tree.root != ids.get(data["root"], -2):
            raise InvalidInputError("declared root has a parent")
        return tree


def _suppress(values, parent, vertex_node=None, vertex_value=None) -> MergeTree:
    values = np.asarray(values, dtype=float)
    parent = np.asarray(parent, dtype=int)
    n = values.size
    root = int(np.flatnonzero(parent < 0)[0])
    nkids = np.bincount(parent[parent >= 0], minlength=n)
    drop = (nkids == 1)
    drop[root] = False
    if not drop.any():
        return MergeTree(values, parent, vertex_node, vertex_value)
    # only child of each dropped node
    only_child = np.full(n, -1)
    for v in range(n):
        p = parent[v]
        if p >= 0 and drop[p]:
            only_child[p] = v
    keep = np.flatnonzero(~drop)
    new_id = np.full(n, -1)
    new_id[keep] = np.arange(keep.size)

    def surviving_parent(v):
        p = parent[v]
        while p >= 0 and drop[p]:
            p = parent[p]
        return p

    def surviving_child(v):
        while drop[v]:
            v = only_child[v]
        return v

    new_parent = np.array([new_id[surviving_parent(v)] if parent[v] >= 0 else -1
                           for v in keep], dtype=int)
    vn = None
    if vertex_node is not None:
        vn = np.array([new_id[surviving_child(v)] for v in vertex_node], dtype=int)
    return MergeTree(values[keep], new_parent, vn, vertex_value)


# ----------------------------------------------------------------------------
# the pseudo-distance


def _descending(values: np.ndarray) -> np.ndarray:
    # descending value, ties by ascending vertex id
    return np.lexsort((np.arange(values.size), -values))


def df_distance(f: ScalarField, x: int, y: int) -> float:
    """``f(x) + f(y) - 2 * max_paths min_path f`` for vertices x and y."""
    n = len(f)
    for v in (x, y):
        if not 0 <= v < n:
            raise InvalidInputError(f"vertex {v} is not in the graph")
    vals = f.values
    if x == y:
        return 0.0
    uf = _UnionFind(n)
    active = np.zeros(n, dtype=bool)
    nbrs = f.graph.neighbors
    for v in _descending(vals):
        active[v] = True
        for u in nbrs[v]:
            if active[u]:
                ru, rv = uf.find(u), uf.find(v)
                if ru != rv:
                    uf.parent[ru] = rv
        if active[x] and active[y] and uf.find(x) == uf.find(y):
            return float(vals[x] + vals[y] - 2 * vals[v])
    raise InvalidInputError("graph is not connected")


def df_matrix(f: ScalarField) -> np.ndarray:
    """All-pairs ``d_f`` by a descending union-find sweep.

    A first sweep records the merges while concatenating member lists, so
    that every superlevel component is a contiguous block of the final
    order; the merge heights are then written as rectangular slices.
    """
    n = len(f)
    vals = f.values
    uf = _UnionFind(n)
    active = np.zeros(n, dtype=bool)
    nbrs = f.graph.neighbors
    head = list(range(n))
    tail = list(range(n))
    size = [1] * n
    nxt = [-1] * n
    events = []
    for v in _descending(vals):
        active[v] = True
        c = vals[v]
        for u in nbrs[v]:
            if not active[u]:
                continue
            ra, rb = uf.find(u), uf.find(v)
            if ra == rb:
                continue
            events.append((head[ra], size[ra], head[rb], size[rb], c))
            # list of ra followed by list of rb
            nxt[tail[ra]] = head[rb]
            uf.parent[rb] = ra
            tail[ra] = tail[rb]
            size[ra] += size[rb]
    order = np.empty(n, dtype=np.intp)
    x, k = head[uf.find(0)], 0
    while x >= 0:
        order[k] = x
        x, k = nxt[x], k + 1
    if k != n:
        raise InvalidInputError("graph is not connected")
    pos = np.empty(n, dtype=np.intp)
    pos[order] = np.arange(n)
    W = np.empty((n, n))
    W[pos, pos] = vals
    for ha, sa, hb, sb, c in events:
        i, j = pos[ha], pos[hb]
        W[i:i + sa, j:j + sb] = c
        W[j:j + sb, i:i + sa] = c
    W = W[np.ix_(pos, pos)]
    return vals[:, None] + vals[None, :] - 2 * W


# ----------------------------------------------------------------------------
# tree construction


def build_merge_tree(f: ScalarField) -> MergeTree:
    """Merge tree of the superlevel filtration of ``f``.

    Vertices are swept by decreasing value (ties by ascending id).  A vertex
    with no active neighbour starts a leaf, one joining several components
    creates a merge node at its value.  Components meeting a node of the same
    height are absorbed into it, so no zero-length edge is ever created.
    """
    vals = f.values
    n = vals.size
    nbrs = f.graph.neighbors
    uf = _UnionFind(n)
    active = np.zeros(n, dtype=bool)
    head = np.full(n, -1)  # current lowest node of the component, per representative

    node_value: list[float] = []
    node_parent: list[int] = []
    absorbed: list[int] = []  # node merged into another node of equal height
    vertex_node = np.full(n, -1)

    def new_node(value):
        node_value.append(value)
        node_parent.append(-1)
        absorbed.append(-1)
        return len(node_value) - 1

    for v in _descending(vals):
        c = float(vals[v])
        active[v] = True
        reps = []
        for u in nbrs[v]:
            if active[u] and u != v:
                r = uf.find(u)
                if r not in reps:
                    reps.append(r)
        if not reps:
            node = new_node(c)
            head[v] = node
            vertex_node[v] = node
            continue
        if len(reps) == 1:
            r = reps[0]
            uf.parent[v] = r
            vertex_node[v] = head[r]
            continue
        heads = [head[r] for r in reps]
        level = [h for h in heads if node_value[h] == c]
        if level:
            m = min(level)
            for h in level:
                if h != m:
                    absorbed[h] = m
                    for k in range(len(node_parent)):
                        if node_parent[k] == h:
                            node_parent[k] = m
        else:
            m = new_node(c)
        for h in heads:
            if h != m and absorbed[h] < 0:
                node_parent[h] = m
        for r in reps:
            uf.parent[r] = v
        head[v] = m
        vertex_node[v] = m

    top = head[uf.find(int(np.argmin(vals)))]
    lo = float(vals.min())
    if node_value[top] > lo:
        root = new_node(lo)
        node_parent[top] = root

    # resolve absorbed nodes, then drop them
    def live(h):
        while absorbed[h] >= 0:
            h = absorbed[h]
        return h

    vertex_node = np.array([live(h) for h in vertex_node])
    keep = [i for i in range(len(node_value)) if absorbed[i] < 0]
    new_id = {old: new for new, old in enumerate(keep)}
    values = [node_value[i] for i in keep]
    parent = [new_id[node_parent[i]] if node_parent[i] >= 0 else -1 for i in keep]
    vertex_node = np.array([new_id[h] for h in vertex_node])
    tree = _suppress(values, parent, vertex_node, vals.copy())
    if f.graph.edges:
        u, v, _ = np.array(f.graph.edges).T
        jumps = vals[u.astype(int)] - vals[v.astype(int)]
        tree.resolution = float(np.sqrt(np.mean(jumps ** 2)))
    return tree


def height_above(t: MergeTree, node: int) -> float:
    """Extent of the tree above ``node``; zero at leaves."""
    if not 0 <= node < len(t):
        raise InvalidInputError(f"node {node} is not in the tree")
    return float(t.heights[node])


# ----------------------------------------------------------------------------
# trimming


def trim(t: MergeTree, eps: float) -> MergeTree:
    """Subtree of points with at least ``eps`` of tree above them.

    Edges are shortened in place; degree-two nodes left behind are suppressed.
    When nothing survives the single root point is returned.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    H, vals, parent = t.subtree_max, t.values, t.parent
    root = t.root
    if H[root] - vals[root] < eps:
        return MergeTree([vals[root]], [-1])
    keep = H - vals >= eps
    new_id = np.full(len(t), -1)
    kept = np.flatnonzero(keep)
    new_id[kept] = np.arange(kept.size)
    values = list(vals[kept])
    parents = [int(new_id[parent[v]]) if parent[v] >= 0 else -1 for v in kept]
    pv = t.parent_values
    for v in np.flatnonzero(~keep):
        tip = H[v] - eps
        if parent[v] >= 0 and tip > pv[v]:
            values.append(tip)
            parents.append(int(new_id[parent[v]]))
    return _suppress(values, parents)


def leaf_count(t: MergeTree, eps: float) -> int:
    """Number of leaves of ``trim(t, eps)``; zero once ``eps`` exceeds the range."""
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    H, vals, pv = t.subtree_max, t.values, t.parent_values
    span = H[t.root] - vals[t.root]
    if eps > span:
        return 0
    tip = H - eps
    hits = (tip > pv) & (tip <= vals)
    hits[t.root] = False
    count = int(hits.sum())
    return count if count else 1


def total_length(t: MergeTree, eps: float = 0.0) -> float:
    """Total edge length of ``trim(t, eps)`` (of ``t`` itself when eps is 0)."""
    if eps < 0:
        raise InvalidInputError("eps must be nonnegative")
    seg = np.minimum(t.values, t.subtree_max - eps) - t.parent_values
    seg[t.root] = 0.0
    return float(np.clip(seg, 0.0, None).sum())


# ----------------------------------------------------------------------------
# contours and marked intervals


@dataclass(frozen=True)
class MarkedInterval:
    length: float
    marks: tuple[float, ...] = field(default=())

    def __post_init__(self):
        length = float(self.length)
        marks = tuple(sorted(float(m) for m in self.marks))
        if length < 0:
            raise InvalidInputError("interval length must be nonnegative")
        if marks and (marks[0] < 0 or marks[-1] > length * (1 + 1e-12) + 1e-300):
            raise InvalidInputError("marks must lie inside the interval")
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "marks", marks)


def compose_intervals(I: MarkedInterval, Js: Sequence[MarkedInterval]) -> MarkedInterval:
    """Insert ``Js[k]`` at the k-th mark of ``I``; marks of the result are those of the Js."""
    Js = list(Js)
    if len(Js) != len(I.marks):
        raise InvalidInputError(f"{len(Js)} intervals for {len(I.marks)} marks")
    marks = []
    shift = 0.0
    for mark, J in zip(I.marks, Js):
        offset = mark + shift
        marks.extend(offset + m for m in J.marks)
        shift += J.length
    return MarkedInterval(I.length + shift, tuple(marks))


def _contour(t: MergeTree):
    """Clockwise contour of ``t``: visited node sequence and leaf visits."""
    kids = t.canonical_children
    seq = [t.root]
    leaf_visit = []
    stack = [(t.root, iter(kids[t.root]))]
    while stack:
        node, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if stack:
                seq.append(stack[-1][0])
            continue
        seq.append(child)
        if not kids[child]:
            leaf_visit.append(len(seq) - 1)
        stack.append((child, iter(kids[child])))
    return seq, leaf_visit


def dyck_path(t: MergeTree, scale: float = 1.0) -> tuple[ScalarField, MarkedInterval]:
    """Contour function of ``t`` on a path graph, abscissae scaled by ``scale``.

    Marks sit at the leaf visits.  The merge tree of the returned field is
    isometric to ``t`` (same canonical form).
    """
    if not scale > 0:
        raise InvalidInputError("scale must be positive")
    if len(t) == 1:
        v = float(t.values[0])
        g = path_graph_from_spacings([scale])
        return ScalarField(g, [v, v]), MarkedInterval(scale, (0.0,))
    seq, leaf_visit = _contour(t)
    heights = t.values[seq]
    steps = scale * np.abs(np.diff(heights))
    xs = np.concatenate([[0.0], np.cumsum(steps)])
    field = ScalarField(path_graph_from_spacings(steps), heights)
    return field, MarkedInterval(float(xs[-1]), tuple(xs[leaf_visit]))


# ----------------------------------------------------------------------------
# inverse problem: approximants of a deep tree


def _level_schedule(a, n_iters):
    return a / 2.0 ** np.arange(n_iters + 1)


def _projections(t: MergeTree, eps: float) -> np.ndarray:
    """Height of each node's projection onto ``trim(t, eps)``."""
    H, vals, pv, parent = t.subtree_max, t.values, t.parent_values, t.parent
    proj = np.empty(len(t))
    for v in t.bottom_up[::-1]:
        if H[v] - vals[v] >= eps:
            proj[v] = vals[v]
        elif parent[v] < 0:
            proj[v] = vals[v]
        elif H[v] - eps >= pv[v]:
            proj[v] = H[v] - eps
        else:
            proj[v] = proj[parent[v]]
    return proj


def _approximant_points(t, a, lam, n_iters):
    """Contour of ``trim(t, a / 2**n_iters)`` split at every level threshold.

    Returns abscissa increments, the heights of every approximant at each
    contour point, and the contour length spent on each level.
    """
    eps = _level_schedule(a, n_iters)
    finest = eps[-1]
    H, vals = t.subtree_max, t.values
    proj = [_projections(t, e) for e in eps[1:]]
    kids = t.canonical_children
    speed = lam ** np.arange(n_iters + 1)

    steps: list[float] = []
    images: list[list[float]] = [[p[t.root] for p in proj]]
    level_len = np.zeros(n_iters + 1)

    def image(u, n, c):
        out = []
        for k, e in enumerate(eps[1:]):
            cap = H[c] - e
            out.append(min(u, cap) if cap >= vals[n] else proj[k][n])
        return out

    def ascend(n, c):
        # (height reached, abscissa step) for each piece of edge n -> c
        pieces = []
        for j, e in enumerate(eps):
            u = H[c] - e
            if vals[n] < u < vals[c]:
                pieces.append((u, j))
        if H[c] - finest < vals[c]:
            pieces.append((H[c] - finest, n_iters))
        else:
            h = H[c] - vals[c]
            pieces.append((vals[c], int(np.argmax(eps <= h)) if h < eps[0] else 0))
        pieces.sort()
        path, lo = [], vals[n]
        for u, j in pieces:
            if u <= lo:
                continue
            dx = speed[j] * (u - lo)
            level_len[j] += 2 * (u - lo)
            path.append((u, dx))
            steps.append(dx)
            images.append(image(u, n, c))
            lo = u
        return path

    def descend(n, c, path):
        lowers = [vals[n]] + [u for u, _ in path[:-1]]
        for (_, dx), lower in zip(reversed(path), reversed(lowers)):
            steps.append(dx)
            images.append(image(lower, n, c))

    stack = [(t.root, iter(kids[t.root]), None)]
    while stack:
        n, it, came_from = stack[-1]
        c = next(it, None)
        if c is None:
            stack.pop()
            if came_from is not None:
                descend(*came_from)
            continue
        if H[c] - finest <= vals[n]:
            continue
        path = ascend(n, c)
        if path[-1][0] == vals[c]:
            stack.append((c, iter(kids[c]), (n, c, path)))
        else:
            descend(n, c, path)
    return np.array(steps), np.array(images), level_len


def approximate_from_tree(t: MergeTree, a: float, lam: float,
                          n_iters: int) -> list[ScalarField]:
    """Approximants ``f_1 .. f_n`` whose merge trees are ``trim(t, a / 2**k)``.

    The contour of ``trim(t, a)`` is the seed.  Step k inserts the contours of
    the forest ``trim(t, a/2**k) \\ trim(t, a/2**(k-1))`` at their attachment
    points, compressed horizontally by ``lam**k``; earlier approximants are
    extended constantly across the inserted pieces.  All approximants share
    one path graph, so ``max |f_n - f_m|`` is exact on its vertices and
    bounded by ``a * 2**-min(n, m)``.
    """
    if not 0.0 < lam < 1.0:
        raise InvalidInputError("lambda must lie in (0, 1)")
    if not a > 0:
        raise InvalidInputError("a must be positive")
    if n_iters < 1:
        raise InvalidInputError("n_iters must be >= 1")
    steps, images, _ = _approximant_points(t, a, lam, n_iters)
    if steps.size == 0:
        v = float(t.values[t.root])
        g = path_graph_from_spacings([1.0])
        return [ScalarField(g, [v, v]) for _ in range(n_iters)]
    g = path_graph_from_spacings(steps)
    return [ScalarField(g, images[:, k]) for k in range(n_iters)]


def approximant_interval_lengths(t: MergeTree, a: float, lam: float,
                                 n_iters: int) -> np.ndarray:
    """Length of the interval carrying ``f_k``'s own structure, k = 1..n.

    Entry k counts the seed contour plus the inserted contours of levels
    1..k at their compressed widths.
    """
    _, _, level_len = _approximant_points(t, a, lam, n_iters)
    widths = level_len * lam ** np.arange(n_iters + 1)
    return np.cumsum(widths)[1:]


# ----------------------------------------------------------------------------
# canonical form and Gromov-Hausdorff bound


def canonical_form(t: MergeTree) -> bytes:
    """Order-independent encoding; equal iff the trees are isometric as rooted trees."""
    t = t.normalized()
    return t._encodings[t.root]


def distortion_bound(f: ScalarField, g: ScalarField, pairs=None,
                     seed: int = 0) -> float:
    """Half the largest ``|d_f - d_g|`` over vertex pairs.

    The identity correspondence bounds the Gromov-Hausdorff distance between
    ``T_f`` and ``T_g`` by this quantity.  All pairs are used up to 2048
    vertices, otherwise a seeded sample of 100 000 pairs.
    """
    if f.graph is not g.graph:
        same = (f.graph.vertex_count == g.graph.vertex_count
                and f.graph.edges == g.graph.edges)
        if not same:
            raise InvalidInputError("fields live on different graphs")
    n = len(f)
    if pairs is None and n <= 2048:
        return 0.5 * float(np.max(np.abs(df_matrix(f) - df_matrix(g))))
    if pairs is None:
        rng = np.random.default_rng(seed)
        pairs = rng.integers(0, n, size=(100_000, 2))
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    if n <= 4096:
        Df, Dg = df_matrix(f), df_matrix(g)
        diff = Df[pairs[:, 0], pairs[:, 1]] - Dg[pairs[:, 0], pairs[:, 1]]
        return 0.5 * float(np.max(np.abs(diff)))
    tf, tg = build_merge_tree(f), build_merge_tree(g)
    worst = 0.0
    for x, y in pairs:
        worst = max(worst, abs(tf.vertex_distance(x, y) - tg.vertex_distance(x, y)))
    return 0.5 * worst


# ----------------------------------------------------------------------------
# synthetic trees


def random_merge_tree(rng: np.random.Generator, n_leaves: int,
                      base: float = 0.0) -> MergeTree:
    """Random finite tree: leaves are grafted onto random nodes or edge interiors."""
    if n_leaves < 1:
        raise InvalidInputError("need at least one leaf")
    values = [base, base + rng.exponential(1.0)]
    parent = [-1, 0]
    while True:
        leaves = len(values) - len(set(p for p in parent if p >= 0))
        if leaves >= n_leaves:
            break
        v = int(rng.integers(1, len(values)))
        if rng.random() < 0.3 and any(parent[k] == v for k in range(len(values))):
            anchor = v
        else:
            # split the edge below v at a random interior height
            lo, hi = values[parent[v]], values[v]
            cut = lo + (hi - lo) * rng.uniform(0.05, 0.95)
            if not lo < cut < hi:
                continue
            values.append(cut)
            parent.append(parent[v])
            parent[v] = len(values) - 1
            anchor = len(values) - 1
        values.append(values[anchor] + rng.exponential(1.0) + 1e-3)
        parent.append(anchor)
    return _suppress(values, parent)


def unit_edge_tree(rng: np.random.Generator, n_leaves: int) -> MergeTree:
    """Random planted tree with all edges of length one (values are depths)."""
    if n_leaves < 1:
        raise InvalidInputError("need at least one leaf")
    values, parent = [0.0, 1.0], [-1, 0]
    kids = {0: [1]}
    while sum(1 for v in range(len(values)) if v not in kids) < n_leaves:
        v = int(rng.integers(1, len(values)))
        new = 2 if v not in kids else 1
        for _ in range(new):
            values.append(values[v] + 1.0)
            parent.append(v)
            kids.setdefault(v, []).append(len(values) - 1)
    return MergeTree(values, parent)


def cascade_tree(depth: int, branching: int = 2, ratio: float = 0.5,
                 base_length: float = 1.0) -> MergeTree:
    """Self-similar tree: every branch splits into ``branching`` children whose
    edges are ``ratio`` times as long, ``depth`` times."""
    if depth < 0:
        raise InvalidInputError("depth must be nonnegative")
    values, parent = [0.0, base_length], [-1, 0]
    frontier, length = [1], base_length
    for _ in range(depth):
        length *= ratio
        nxt = []
        for v in frontier:
            for _ in range(branching):
                values.append(values[v] + length)
                parent.append(v)
                nxt.append(len(values) - 1)
        frontier = nxt
    return MergeTree(values, parent)
