"""Finite metric graphs, sampled scalar fields and random-field generators.

A compact connected space is modelled by a connected weighted graph; a
continuous function on it by its vertex samples, interpolated linearly along
edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from ._errors import InvalidInputError, NumericalFailureError

__all__ = [
    "MetricGraph",
    "ScalarField",
    "path_graph",
    "cycle_graph",
    "grid_graph",
    "graph_distance",
    "gen_fbm",
    "gen_random_fourier",
    "maximal_packing",
    "cover_by_doubling",
    "gen_distance_to_net",
]


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Connected undirected graph with positive edge lengths.

    Vertices are ``0 .. vertex_count - 1``; ``edges`` holds ``(u, v, length)``.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        n = int(self.vertex_count)
        if n < 1:
            raise InvalidInputError("a graph needs at least one vertex")
        clean = []
        for u, v, length in self.edges:
            u, v, length = int(u), int(v), float(length)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInputError(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u}")
            if not (length > 0 and np.isfinite(length)):
                raise InvalidInputError(f"edge ({u}, {v}) has non-positive length {length}")
            clean.append((u, v, length))
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", tuple(clean))
        if n > 1:
            ncomp, _ = connected_components(self.adjacency, directed=False)
            if ncomp != 1:
                raise InvalidInputError("graph is not connected")

    @cached_property
    def adjacency(self) -> csr_matrix:
        """Symmetric sparse matrix of edge lengths (parallel edges keep the shortest)."""
        n = self.vertex_count
        best: dict[tuple[int, int], float] = {}
        for u, v, length in self.edges:
            key = (min(u, v), max(u, v))
            if key not in best or length < best[key]:
                best[key] = length
        if not best:
            return csr_matrix((n, n))
        rows, cols, vals = [], [], []
        for (u, v), length in best.items():
            rows += [u, v]
            cols += [v, u]
            vals += [length, length]
        return csr_matrix((vals, (rows, cols)), shape=(n, n))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for u, v, _ in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(tuple(sorted(s)) for s in nbrs)

    def distances_from(self, sources, limit: float = np.inf) -> np.ndarray:
        """Shortest-path distance from the nearest of ``sources`` to every vertex."""
        sources = np.atleast_1d(np.asarray(sources, dtype=int))
        if self.vertex_count == 1:
            return np.zeros(1)
        return dijkstra(self.adjacency, directed=False, indices=sources,
                        min_only=True, limit=limit)

    def all_distances(self) -> np.ndarray:
        if self.vertex_count == 1:
            return np.zeros((1, 1))
        return dijkstra(self.adjacency, directed=False)

    def diameter(self) -> float:
        return float(self.all_distances().max())

    def is_path(self) -> bool:
        """True for a path ``0 - 1 - ... - (n-1)`` in vertex order."""
        n = self.vertex_count
        if len(self.edges) != n - 1:
            return False
        return all({u, v} == {i, i + 1} for i, (u, v, _) in
                   enumerate(sorted(self.edges, key=lambda e: min(e[0], e[1]))))

    def path_spacings(self) -> np.ndarray:
        """Edge lengths of a path graph, in vertex order."""
        if not self.is_path():
            raise InvalidInputError("domain is not a path graph")
        ordered = sorted(self.edges, key=lambda e: min(e[0], e[1]))
        return np.array([e[2] for e in ordered])


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Finite real values sampled on the vertices of a graph."""

    graph: MetricGraph
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.graph.vertex_count:
            raise InvalidInputError(
                f"{values.shape[0]} values for {self.graph.vertex_count} vertices")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def range(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def sup_distance(self, other: "ScalarField") -> float:
        if other.graph is not self.graph and len(other) != len(self):
            raise InvalidInputError("fields live on different graphs")
        return float(np.max(np.abs(self.values - other.values)))

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.graph, values)


# ----------------------------------------------------------------------------
# graph constructors


def path_graph(n: int, spacing: float = 1.0) -> MetricGraph:
    if n < 2:
        raise InvalidInputError("a path graph needs n >= 2")
    if not spacing > 0:
        raise InvalidInputError("spacing must be positive")
    return MetricGraph(n, tuple((i, i + 1, spacing) for i in range(n - 1)))


def path_graph_from_spacings(spacings: Sequence[float]) -> MetricGraph:
    spacings = list(spacings)
    if not spacings:
        raise InvalidInputError("a path graph needs n >= 2")
    return MetricGraph(len(spacings) + 1,
                       tuple((i, i + 1, s) for i, s in enumerate(spacings)))


def cycle_graph(n: int, spacing: float = 1.0) -> MetricGraph:
    if n < 3:
        raise InvalidInputError("a cycle graph needs n >= 3")
    return MetricGraph(n, tuple((i, (i + 1) % n, spacing) for i in range(n)))


def grid_graph(nx: int, ny: int, spacing: float = 1.0) -> MetricGraph:
    """4-neighbour lattice; vertex ``i + nx * j`` sits at column i, row j."""
    if nx < 2 or ny < 2:
        raise InvalidInputError("grid dimensions must be >= 2")
    if not spacing > 0:
        raise InvalidInputError("spacing must be positive")
    edges = []
    for j in range(ny):
        for i in range(nx):
            v = i + nx * j
            if i + 1 < nx:
                edges.append((v, v + 1, spacing))
            if j + 1 < ny:
                edges.append((v, v + nx, spacing))
    return MetricGraph(nx * ny, tuple(edges))


def graph_distance(g: MetricGraph, u: int, v: int) -> float:
    for w in (u, v):
        if not 0 <= w < g.vertex_count:
            raise InvalidInputError(f"vertex {w} is not in the graph")
    if u == v:
        return 0.0
    return float(g.distances_from([u])[v])


# ----------------------------------------------------------------------------
# random fields


def _fgn_eigenvalues(m: int, hurst: float) -> np.ndarray:
    k = np.arange(m + 1, dtype=float)
    two_h = 2.0 * hurst
    gamma = 0.5 * (np.abs(k - 1) ** two_h - 2 * k ** two_h + (k + 1) ** two_h)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    return np.fft.fft(row).real


def gen_fbm(n: int, hurst: float, seed: int) -> ScalarField:
    """Fractional Brownian motion on ``[0, 1]`` sampled at ``n`` points.

    Exact in distribution: the fractional Gaussian noise increments are drawn
    by circulant embedding of their covariance (Davies-Harte), then summed.
    """
    if n < 2:
        raise InvalidInputError("fBm needs n >= 2")
    if not 0.0 < hurst < 1.0:
        raise InvalidInputError(f"hurst must lie in (0, 1), got {hurst}")
    m = n - 1
    rng = np.random.default_rng(seed)
    if m == 1:
        increments = rng.standard_normal(1)
    else:
        lam = _fgn_eigenvalues(m, hurst)
        if lam.min() < -1e-10 * lam.max():
            raise NumericalFailureError("circulant embedding is not positive semidefinite")
        lam = np.clip(lam, 0.0, None)
        size = lam.shape[0]
        z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        w = np.fft.fft(np.sqrt(lam / size) * z)
        increments = w.real[:m]
    increments *= (1.0 / m) ** hurst
    values = np.concatenate([[0.0], np.cumsum(increments)])
    return ScalarField(path_graph(n, 1.0 / m), values)


def gen_random_fourier(n: int, mode_count: int, decay: float, seed: int,
                       coefficients=None) -> ScalarField:
    """Random Fourier series ``sum_k k^-decay (a_k cos 2pi k x + b_k sin 2pi k x)``
    on a cycle of ``n`` vertices at ``x = j / n``.

    ``coefficients`` fixes ``(a, b)`` instead of drawing them.
    """
    if n < 4:
        raise InvalidInputError("Fourier fields need n >= 4")
    if mode_count < 1:
        raise InvalidInputError("mode_count must be >= 1")
    if not decay > 1:
        raise InvalidInputError("decay must exceed 1")
    if coefficients is None:
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(mode_count)
        b = rng.standard_normal(mode_count)
    else:
        a, b = (np.asarray(c, dtype=float).reshape(mode_count) for c in coefficients)
    k = np.arange(1, mode_count + 1, dtype=float)
    x = np.arange(n) / n
    phase = 2 * np.pi * np.outer(x, k)
    values = (np.cos(phase) * (a * k ** -decay) + np.sin(phase) * (b * k ** -decay)).sum(axis=1)
    return ScalarField(cycle_graph(n, 1.0 / n), values)


def smooth_bump(n: int, seed: int, modes: int = 3) -> np.ndarray:
    """Low-mode trigonometric perturbation on ``n`` equispaced points, sup-norm 1."""
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n)
    k = np.arange(1, modes + 1)
    a, b = rng.standard_normal(modes), rng.standard_normal(modes)
    phase = np.pi * np.outer(x, k)
    bump = (np.cos(phase) * (a / k ** 2) + np.sin(phase) * (b / k ** 2)).sum(axis=1)
    return bump / np.max(np.abs(bump))


# ----------------------------------------------------------------------------
# packings, covers, distance-to-net fields


def maximal_packing(g: MetricGraph, eps: float) -> list[int]:
    """Greedy maximal set of centres pairwise more than ``2 * eps`` apart.

    Vertices are scanned in ascending id, so the result is deterministic.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    nearest = np.full(g.vertex_count, np.inf)
    centres = []
    for v in range(g.vertex_count):
        if nearest[v] > 2 * eps:
            centres.append(v)
            if g.vertex_count > 1:
                nearest = np.minimum(nearest, g.distances_from([v], limit=2 * eps))
            else:
                nearest[v] = 0.0
    return centres


def cover_by_doubling(g: MetricGraph, packing: Iterable[int], eps: float) -> bool:
    """Whether balls of radius ``2 * eps`` around ``packing`` cover every vertex."""
    packing = list(packing)
    if not packing:
        return False
    return bool(np.all(g.distances_from(packing) <= 2 * eps))


def gen_distance_to_net(g: MetricGraph, eps: float, alpha: float = 1.0) -> ScalarField:
    """``x -> d(x, P)^alpha`` for the greedy maximal ``eps``-packing ``P``."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError("alpha must lie in (0, 1]")
    centres = maximal_packing(g, eps)
    return ScalarField(g, g.distances_from(centres) ** alpha)
