"""Degree-zero barcodes, Pers_p functionals and dimension estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._errors import InvalidInputError
from .domain import ScalarField
from .tree import MergeTree, _UnionFind, _descending, build_merge_tree, leaf_count

__all__ = [
    "Bar",
    "Diagram",
    "barcode_from_tree",
    "barcode_from_field",
    "elder_rule_barcode",
    "pers_p",
    "mellin_pers_p",
    "geometric_grid",
    "default_grid",
    "IndexEstimate",
    "persistence_index",
    "covering_number",
    "box_dimension",
    "p_variation",
    "variation_index",
]


class Bar(NamedTuple):
    birth: float
    death: float
    essential: bool = False

    def length(self, lo: float | None = None) -> float:
        """Length, with an essential bar clipped at ``lo``."""
        if self.essential:
            return self.birth - lo
        return self.birth - self.death


@dataclass(frozen=True)
class Diagram:
    """Multiset of superlevel bars plus the range of the underlying function.

    Births are the higher ends.  The essential bar keeps ``death = -inf``.
    """

    bars: tuple[Bar, ...]
    range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.range
        bars = tuple(sorted((Bar(float(b), float(d), bool(e)) for b, d, e in self.bars),
                            key=lambda b: (-b.birth, -b.death, b.essential)))
        for b in bars:
            if b.essential:
                if b.death != -math.inf:
                    raise InvalidInputError("essential bars die at -inf")
            elif not (lo <= b.death <= b.birth <= hi):
                raise InvalidInputError(f"bar {b} leaves the range {self.range}")
        object.__setattr__(self, "bars", bars)
        object.__setattr__(self, "range", (float(lo), float(hi)))

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def finite(self) -> list[Bar]:
        return [b for b in self.bars if not b.essential]

    @property
    def essential(self) -> list[Bar]:
        return [b for b in self.bars if b.essential]

    def lengths(self) -> np.ndarray:
        """Bar lengths with essential bars clipped to the range."""
        lo = self.range[0]
        return np.array([b.length(lo) for b in self.bars], dtype=float)

    def pairs(self) -> list[tuple[float, float]]:
        """(birth, death) pairs; essential deaths clipped to the range."""
        lo = self.range[0]
        return [(b.birth, lo if b.essential else b.death) for b in self.bars]


def barcode_from_tree(t: MergeTree) -> Diagram:
    """Peel longest root-to-leaf paths off the tree.

    The first path gives the essential bar; every later path starts at its
    attachment point ``alpha`` and ends at a leaf ``beta``, giving the bar
    ``[value(alpha), value(beta)]``.  Locally this keeps, at each node, the
    child with the highest subtree (ties by canonical order) on the current
    path and starts new bars for the others.
    """
    H = t.subtree_max
    kids = t.canonical_children
    vals = t.values
    bars = [Bar(float(H[t.root]), -math.inf, True)]
    for v in range(len(t)):
        if not kids[v]:
            continue
        # canonical order is ascending in subtree max; the last one continues
        for c in kids[v][:-1]:
            bars.append(Bar(float(H[c]), float(vals[v])))
    return Diagram(tuple(bars), (float(vals[t.root]), float(H[t.root])))


def elder_rule_barcode(f: ScalarField) -> Diagram:
    """Superlevel H0 barcode by a direct union-find sweep.

    On a merge the component with the highest birth survives (ties: lowest
    birth vertex id); each younger one dies unless its bar has zero length.
    """
    vals = f.values
    n = vals.size
    uf = _UnionFind(n)
    active = np.zeros(n, dtype=bool)
    birth_vertex = np.arange(n)
    nbrs = f.graph.neighbors
    bars = []

    def older(a, b):
        va, vb = vals[a], vals[b]
        return va > vb or (va == vb and a < b)

    for v in _descending(vals):
        active[v] = True
        c = vals[v]
        for u in nbrs[v]:
            if not active[u]:
                continue
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue
            bu, bv = birth_vertex[ru], birth_vertex[rv]
            if older(bv, bu):
                ru, rv, bu, bv = rv, ru, bv, bu
            # bu is the elder; the component of bv dies here
            if vals[bv] > c:
                bars.append(Bar(float(vals[bv]), float(c)))
            uf.parent[rv] = ru
    lo, hi = float(vals.min()), float(vals.max())
    bars.append(Bar(hi, -math.inf, True))
    return Diagram(tuple(bars), (lo, hi))


def barcode_from_field(f: ScalarField, method: str = "tree") -> Diagram:
    if method == "tree":
        return barcode_from_tree(build_merge_tree(f))
    if method == "elder":
        return elder_rule_barcode(f)
    raise InvalidInputError(f"unknown method {method!r}")


def pers_p(d: Diagram, p: float) -> float:
    """l^p norm of the clipped bar lengths."""
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    lengths = d.lengths()
    if math.isinf(p):
        return float(lengths.max(initial=0.0))
    return float(np.sum(lengths ** p) ** (1.0 / p))


def mellin_pers_p(t: MergeTree, p: float) -> float:
    """``p * integral eps^(p-1) N^eps deps`` evaluated piecewise exactly.

    ``N^eps`` is read off the trimmed tree only, at the midpoints between the
    heights where a leaf can appear or vanish; returns ``Pers_p^p``.
    """
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    H, vals, pv = t.subtree_max, t.values, t.parent_values
    cuts = np.unique(np.concatenate([[0.0], H - vals, H - pv]))
    cuts = cuts[cuts >= 0]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n = leaf_count(t, 0.5 * (lo + hi))
        total += n * (hi ** p - lo ** p)
    return total


# ----------------------------------------------------------------------------
# dimension estimators


def geometric_grid(span: float, k_min: int = 3, k_max: int = 12) -> np.ndarray:
    """Scales ``span * 2**-k`` for ``k = k_min .. k_max``."""
    if not span > 0:
        raise InvalidInputError("grid span must be positive")
    if k_max - k_min + 1 < 6:
        raise InvalidInputError("a regression grid needs at least 6 scales")
    return span * 2.0 ** -np.arange(k_min, k_max + 1, dtype=float)


@dataclass(frozen=True)
class IndexEstimate:
    slope: float
    intercept: float
    r2: float
    index: float
    grid: tuple[float, ...]
    window_max: float = float("nan")

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "index": self.index, "grid": list(self.grid),
                "window_max": self.window_max}


def _loglog(eps: np.ndarray, counts: np.ndarray):
    x = np.log(1.0 / eps)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _window_slopes(eps, counts, width=5):
    if len(eps) < width:
        return [_loglog(eps, counts)[0]]
    return [_loglog(eps[i:i + width], counts[i:i + width])[0]
            for i in range(len(eps) - width + 1)]


def default_grid(t: MergeTree) -> np.ndarray:
    """Scales for index regression on ``t``.

    Trees of sampled fields saturate once scales approach the typical jump
    between neighbouring samples, so when that resolution is known the grid
    runs geometrically (8 points) from a quarter of the range down to eight
    times the resolution.  Otherwise ``range * 2**-k`` for k = 3..12.
    """
    lo, hi = t.range
    span = hi - lo
    if not span > 0:
        raise InvalidInputError("constant tree: no scales to regress on")
    res = getattr(t, "resolution", None)
    if res and 8 * res < span / 8:
        return np.geomspace(span / 4, 8 * res, 8)
    return geometric_grid(span)


def _check_grid(t: MergeTree, eps_grid) -> np.ndarray:
    lo, hi = t.range
    span = hi - lo
    if eps_grid is None:
        eps_grid = default_grid(t)
    eps = np.sort(np.asarray(eps_grid, dtype=float))[::-1]
    if eps.size < 6 or np.any(eps <= 0) or np.any(eps >= span) or np.unique(eps).size < eps.size:
        raise InvalidInputError("grid needs >= 6 distinct scales inside (0, range)")
    return eps


def persistence_index(t: MergeTree, eps_grid=None) -> IndexEstimate:
    """Log-log regression of the trimmed leaf count ``N^eps`` against ``1/eps``.

    ``slope``, ``intercept`` and ``r2`` describe the least-squares fit over
    the whole grid.  The asymptotic limsup is approximated by the steepest
    5-point window, and ``index = max(window_max, 1)``.
    """
    eps = _check_grid(t, eps_grid)
    counts = np.array([max(leaf_count(t, e), 1) for e in eps], dtype=float)
    slope, intercept, r2 = _loglog(eps, counts)
    window_max = max(_window_slopes(eps, counts))
    return IndexEstimate(slope, intercept, r2, max(window_max, 1.0),
                         tuple(eps.tolist()), window_max)


def _advance(D, S, L, eps):
    """Push a cover state down an edge of length L; returns (D, S, centres)."""
    placed = 0
    pos = 0.0
    if D is None:
        reach = eps - S
        if L <= reach:
            return None, S + L, 0
        D, pos = 0.0, reach
    while True:
        if D + (L - pos) <= eps:
            return D + (L - pos), None, placed
        centre = pos + (eps - D)
        placed += 1
        if L <= centre + eps:
            return None, L - centre, placed
        # a run of fresh centres each covering 2 eps of the edge
        pos, D = centre + eps, 0.0
        extra = int((L - pos) // (2 * eps))
        if extra > 1:
            placed += extra - 1
            pos += (extra - 1) * 2 * eps


def covering_number(t: MergeTree, eps: float) -> int:
    """Number of radius-``eps`` balls used by a greedy leaves-first cover.

    Centres may sit anywhere on the tree.  Working upward from the leaves, a
    centre is placed exactly ``eps`` below the farthest point still
    uncovered, which is optimal on trees.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    vals, parent = t.values, t.parent
    n = len(t)
    demand = [None] * n   # farthest uncovered point above the node
    supply = [None] * n   # nearest centre above the node
    count = 0
    for v in t.bottom_up:
        kids = t.children[v]
        D = None
        S = None
        for c in kids:
            dc, sc, placed = _advance(demand[c], supply[c], vals[c] - vals[v], eps)
            count += placed
            if dc is not None:
                D = dc if D is None else max(D, dc)
            if sc is not None:
                S = sc if S is None else min(S, sc)
        if D is not None and S is not None and D + S <= eps:
            D = None
        if D is None and (S is None or S > eps):
            D = 0.0
        demand[v], supply[v] = D, S
    if demand[t.root] is not None:
        count += 1
    return count


def box_dimension(t: MergeTree, eps_grid=None) -> dict:
    """Windowed log-log slopes of the covering number over the tree metric."""
    eps = _check_grid(t, eps_grid)
    counts = np.array([covering_number(t, e) for e in eps], dtype=float)
    slopes = _window_slopes(eps, counts)
    slope, intercept, r2 = _loglog(eps, counts)
    return {"upper_est": float(max(slopes)), "lower_est": float(min(slopes)),
            "slope": slope, "r2": r2, "grid": eps.tolist(),
            "counts": counts.tolist()}


# ----------------------------------------------------------------------------
# p-variation


def _turning_points(x: np.ndarray) -> np.ndarray:
    """Endpoints and strict local extrema; dropping the rest never lowers a p-sum, p >= 1."""
    if x.size <= 2:
        return x
    d = np.diff(x)
    keep = d != 0
    x = np.concatenate([[x[0]], x[1:][keep]])
    if x.size <= 2:
        return x
    d = np.diff(x)
    turn = np.sign(d[1:]) != np.sign(d[:-1])
    return np.concatenate([[x[0]], x[1:-1][turn], [x[-1]]])


def p_variation(f, p: float) -> float:
    """Supremum over sub-partitions of the samples of ``(sum |increment|^p)^(1/p)``.

    Accepts a field on a path graph or a plain sequence of samples.
    """
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    if isinstance(f, ScalarField):
        if not f.graph.is_path():
            raise InvalidInputError("p-variation needs a path-graph domain")
        x = f.values
    else:
        x = np.asarray(f, dtype=float).reshape(-1)
    x = _turning_points(x)
    if p == 1:
        return float(np.abs(np.diff(x)).sum())
    best = np.zeros(x.size)
    for j in range(1, x.size):
        best[j] = np.max(best[:j] + np.abs(x[j] - x[:j]) ** p)
    return float(best[-1] ** (1.0 / p))


def variation_index(f, p_pair: tuple[float, float] = (1.0, 1.25),
                    levels: int = 4) -> float:
    """Estimate ``inf{p : p-variation finite}`` from dyadic subsamples.

    For each p, ``g(p)`` is the growth exponent of ``p_variation^p`` against
    the number of samples.  ``g`` is positive below the index and vanishes
    above it; the root of the line through the two probed exponents is
    returned, clipped below at 1.
    """
    x = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
    if levels < 2:
        raise InvalidInputError("need at least two subsampling levels")
    sizes, sums = [], []
    for lev in range(levels):
        sub = x[::2 ** (levels - 1 - lev)]
        sizes.append(sub.size)
        sums.append([p_variation(sub, p) ** p for p in p_pair])
    logn = np.log(sizes)
    logs = np.log(np.maximum(np.array(sums), np.finfo(float).tiny))
    g = [np.polyfit(logn, logs[:, i], 1)[0] for i in range(2)]
    (p0, p1), (g0, g1) = p_pair, g
    if g0 <= 0:
        return 1.0
    if g1 >= g0:
        return float(p0 / (1.0 - min(g0, 0.99)))
    return float(max(1.0, p0 + g0 * (p1 - p0) / (g0 - g1)))
