"""Optimal partial transport between persistence diagrams and measures.

Points live in the open half-plane ``{(x, y) : y > x}`` with ``x`` the death
and ``y`` the birth of a bar.  The diagonal is an unlimited reservoir: mass
may be created or destroyed there at the l-infinity cost ``(y - x) / 2``.
For finitely supported measures it suffices to give each atom its own
diagonal projection as a partner, plus a free diagonal-to-diagonal sink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching, maximum_flow

from ._errors import InvalidInputError
from ._flow import min_cost_transport
from .barcode import Diagram

__all__ = [
    "PersistenceMeasure",
    "TransportPlan",
    "DIAGONAL",
    "to_measure",
    "bottleneck",
    "wasserstein_p",
    "mean_measure",
    "wasserstein_between_distributions",
    "coupled_cost",
]

DIAGONAL = -1
ESSENTIAL_POLICIES = ("clip", "drop", "separate")
_MAX_DENOMINATOR = 10 ** 6
_SPLIT_LIMIT = 4000


@dataclass(frozen=True, eq=False)
class PersistenceMeasure:
    """Finite weighted point measure above the diagonal.

    ``essential`` flags atoms coming from clipped essential bars; it only
    matters under the ``separate`` matching policy.
    """

    points: np.ndarray
    masses: np.ndarray
    essential: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        masses = (np.ones(len(pts)) if self.masses is None
                  else np.asarray(self.masses, dtype=float).reshape(-1))
        ess = (np.zeros(len(pts), dtype=bool) if self.essential is None
               else np.asarray(self.essential, dtype=bool).reshape(-1))
        if masses.shape[0] != pts.shape[0] or ess.shape[0] != pts.shape[0]:
            raise InvalidInputError("points, masses and flags must align")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("atoms must have finite coordinates")
        if np.any(pts[:, 1] <= pts[:, 0]):
            raise InvalidInputError("atoms must lie strictly above the diagonal")
        if np.any(masses <= 0) or not np.all(np.isfinite(masses)):
            raise InvalidInputError("masses must be positive")
        for name, arr in (("points", pts), ("masses", masses), ("essential", ess)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def unit(self) -> bool:
        return bool(np.all(self.masses == 1.0))

    @classmethod
    def empty(cls) -> "PersistenceMeasure":
        return cls(np.zeros((0, 2)), np.zeros(0))

    def scaled(self, t: float) -> "PersistenceMeasure":
        if not t >= 0:
            raise InvalidInputError("scale must be nonnegative")
        if t == 0:
            return PersistenceMeasure.empty()
        return PersistenceMeasure(self.points, self.masses * t, self.essential)

    def __add__(self, other: "PersistenceMeasure") -> "PersistenceMeasure":
        return _merge_atoms(np.vstack([self.points, other.points]),
                            np.concatenate([self.masses, other.masses]),
                            np.concatenate([self.essential, other.essential]))

    def integrate(self, func) -> float:
        """``sum mass * func(x, y)`` over the atoms."""
        if not len(self):
            return 0.0
        vals = func(self.points[:, 0], self.points[:, 1])
        return float(np.sum(self.masses * vals))

    def diameter(self) -> float:
        if not len(self):
            return 0.0
        return float(max(np.ptp(self.points[:, 0]), np.ptp(self.points[:, 1]),
                         np.max(self.points[:, 1] - self.points[:, 0]) / 2))


@dataclass(frozen=True)
class TransportPlan:
    """Assignments ``(source, target, mass)``; ``DIAGONAL`` marks the reservoir."""

    assignments: tuple[tuple[int, int, float], ...]
    cost_p: float

    def rows(self, mu: PersistenceMeasure, nu: PersistenceMeasure, p: float):
        for s, t, mass in self.assignments:
            yield s, t, mass, _pair_cost(mu, nu, s, t) ** p if math.isfinite(p) else \
                _pair_cost(mu, nu, s, t)


def _merge_atoms(points, masses, essential) -> PersistenceMeasure:
    if len(points) == 0:
        return PersistenceMeasure.empty()
    keys = np.column_stack([points, essential.astype(float)])
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv, masses)
    return PersistenceMeasure(uniq[:, :2], merged, uniq[:, 2] > 0.5)


def to_measure(d: Diagram, clip: bool = True) -> PersistenceMeasure:
    """Unit atoms at ``(death, birth)``.

    Essential bars become the atom ``(min f, birth)`` when ``clip`` is set and
    are dropped otherwise.  Zero-length bars carry no mass and are skipped.
    """
    lo = d.range[0]
    pts, ess = [], []
    for b in d.bars:
        if b.essential:
            if not clip:
                continue
            death = lo
        else:
            death = b.death
        if b.birth > death:
            pts.append((death, b.birth))
            ess.append(b.essential)
    if not pts:
        return PersistenceMeasure.empty()
    return PersistenceMeasure(np.array(pts), np.ones(len(pts)), np.array(ess))


def _apply_policy(mu: PersistenceMeasure, essential: str) -> PersistenceMeasure:
    if essential not in ESSENTIAL_POLICIES:
        raise InvalidInputError(f"essential policy must be one of {ESSENTIAL_POLICIES}")
    if essential == "drop" and mu.essential.any():
        keep = ~mu.essential
        if not keep.any():
            return PersistenceMeasure.empty()
        return PersistenceMeasure(mu.points[keep], mu.masses[keep], mu.essential[keep])
    return mu


def _linf(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    if len(P) == 0 or len(Q) == 0:
        return np.zeros((len(P), len(Q)))
    return np.max(np.abs(P[:, None, :] - Q[None, :, :]), axis=2)


def _diag(P: np.ndarray) -> np.ndarray:
    return (P[:, 1] - P[:, 0]) / 2.0


def _pair_cost(mu, nu, s, t) -> float:
    if s == DIAGONAL and t == DIAGONAL:
        return 0.0
    if s == DIAGONAL:
        return float(_diag(nu.points[t:t + 1])[0])
    if t == DIAGONAL:
        return float(_diag(mu.points[s:s + 1])[0])
    return float(np.max(np.abs(mu.points[s] - nu.points[t])))


def _cross_costs(mu, nu, essential):
    D = _linf(mu.points, nu.points)
    if essential == "separate" and D.size:
        D = np.where(mu.essential[:, None] != nu.essential[None, :], np.inf, D)
    return D


def _augmented(mu, nu, essential):
    """Square cost matrix of the diagonal-augmented assignment problem."""
    n, m = len(mu), len(nu)
    A = np.full((n + m, m + n), np.inf)
    A[:n, :m] = _cross_costs(mu, nu, essential)
    if n:
        A[np.arange(n), m + np.arange(n)] = _diag(mu.points)
    if m:
        A[n + np.arange(m), np.arange(m)] = _diag(nu.points)
    A[n:, m:] = 0.0
    return A


def _integer_masses(*measures):
    """Scale masses to integers over a common denominator, or refuse."""
    fracs = []
    denom = 1
    for mu in measures:
        row = []
        for mass in mu.masses:
            fr = Fraction(float(mass)).limit_denominator(_MAX_DENOMINATOR)
            if abs(float(fr) - mass) > 1e-12 * max(1.0, mass):
                raise InvalidInputError(f"mass {mass!r} is not a rational with small denominator")
            row.append(fr)
            denom = math.lcm(denom, fr.denominator)
            if denom > _MAX_DENOMINATOR:
                raise InvalidInputError("common mass denominator exceeds 10^6")
        fracs.append(row)
    return [np.array([int(fr * denom) for fr in row], dtype=np.int64) for row in fracs], denom


def _weighted_problem(mu, nu, essential):
    """Supplies, demands and costs of the transportation form, masses scaled."""
    (a, b), denom = _integer_masses(mu, nu)
    n, m = len(mu), len(nu)
    C = np.full((n + 1, m + 1), np.inf)
    C[:n, :m] = _cross_costs(mu, nu, essential)
    C[:n, m] = _diag(mu.points)
    C[n, :m] = _diag(nu.points)
    C[n, m] = 0.0
    supply = np.concatenate([a, [b.sum()]])
    demand = np.concatenate([b, [a.sum()]])
    return supply, demand, C, denom


# ----------------------------------------------------------------------------
# distances


def _split_units(mu, counts):
    idx = np.repeat(np.arange(len(mu)), counts)
    return PersistenceMeasure(mu.points[idx], np.ones(idx.size), mu.essential[idx]), idx


def wasserstein_p(mu: PersistenceMeasure, nu: PersistenceMeasure, p: float = 2.0,
                  essential: str = "clip", return_plan: bool = False):
    """Partial optimal transport distance ``d_p`` with l-infinity ground cost."""
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    if math.isinf(p):
        return bottleneck(mu, nu, essential=essential)
    mu, nu = _apply_policy(mu, essential), _apply_policy(nu, essential)
    if mu.unit and nu.unit:
        return _wasserstein_unit(mu, nu, p, essential, return_plan)
    supply, demand, C, denom = _weighted_problem(mu, nu, essential)
    if supply.sum() <= _SPLIT_LIMIT:
        mu1, mi = _split_units(mu, supply[:-1])
        nu1, ni = _split_units(nu, demand[:-1])
        res = _wasserstein_unit(mu1, nu1, p, essential, return_plan)
        if not return_plan:
            return res / denom ** (1.0 / p)
        value, plan = res
        remap = [(int(mi[s]) if s != DIAGONAL else s, int(ni[t]) if t != DIAGONAL else t,
                  mass / denom) for s, t, mass in plan.assignments]
        return value / denom ** (1.0 / p), TransportPlan(tuple(remap), plan.cost_p / denom)
    flow, total = min_cost_transport(supply, demand, np.where(np.isfinite(C), C ** p, np.inf))
    value = (total / denom) ** (1.0 / p)
    if not return_plan:
        return value
    n, m = len(mu), len(nu)
    rows = []
    for i, j in zip(*np.nonzero(flow)):
        if i == n and j == m:
            continue
        rows.append((int(i) if i < n else DIAGONAL, int(j) if j < m else DIAGONAL,
                     flow[i, j] / denom))
    return value, TransportPlan(tuple(rows), total / denom)


def _wasserstein_unit(mu, nu, p, essential, return_plan):
    n, m = len(mu), len(nu)
    if n + m == 0:
        return (0.0, TransportPlan((), 0.0)) if return_plan else 0.0
    A = _augmented(mu, nu, essential) ** p
    rows, cols = linear_sum_assignment(A)
    # correctly rounded, so the value does not depend on argument order
    total = math.fsum(A[rows, cols])
    value = total ** (1.0 / p)
    if not return_plan:
        return value
    plan = []
    for r, c in zip(rows, cols):
        if r >= n and c >= m:
            continue
        plan.append((int(r) if r < n else DIAGONAL, int(c) if c < m else DIAGONAL, 1.0))
    return value, TransportPlan(tuple(plan), total)


def bottleneck(mu: PersistenceMeasure, nu: PersistenceMeasure,
               essential: str = "clip") -> float:
    """``d_inf``: the smallest threshold admitting a full transport.

    The optimum is one of the finitely many pairwise or diagonal costs, found
    by binary search with an exact feasibility test (bipartite matching for
    unit masses, maximum flow on integer-scaled masses otherwise).
    """
    mu, nu = _apply_policy(mu, essential), _apply_policy(nu, essential)
    if len(mu) + len(nu) == 0:
        return 0.0
    if mu.unit and nu.unit:
        A = _augmented(mu, nu, essential)
        feasible = lambda c: _perfect_matching(A <= c)
        values = A[np.isfinite(A)]
    else:
        supply, demand, C, _ = _weighted_problem(mu, nu, essential)
        feasible = lambda c: _full_flow(supply, demand, C <= c)
        values = C[np.isfinite(C)]
    cand = np.unique(values)
    lo, hi = 0, cand.size - 1
    if not feasible(cand[hi]):
        raise InvalidInputError("no admissible transport under the essential policy")
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def _perfect_matching(mask: np.ndarray) -> bool:
    graph = csr_matrix(mask.astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def _full_flow(supply, demand, mask) -> bool:
    n, m = mask.shape
    src, sink = n + m, n + m + 1
    big = int(supply.sum())
    if big >= 2 ** 31:
        raise InvalidInputError("scaled masses too large for the flow solver")
    rows, cols, caps = [], [], []
    for i in range(n):
        rows.append(src); cols.append(i); caps.append(int(supply[i]))
    ii, jj = np.nonzero(mask)
    rows += list(ii); cols += list(n + jj); caps += [big] * ii.size
    for j in range(m):
        rows.append(n + j); cols.append(sink); caps.append(int(demand[j]))
    graph = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)),
                       shape=(n + m + 2, n + m + 2))
    return maximum_flow(graph, src, sink).flow_value == big


# ----------------------------------------------------------------------------
# random diagrams


def mean_measure(diagrams: Sequence, clip: bool = True) -> PersistenceMeasure:
    """Empirical mean of diagram measures: every bar weighs ``1 / len(diagrams)``."""
    diagrams = list(diagrams)
    if not diagrams:
        raise InvalidInputError("mean of an empty list")
    measures = [d if isinstance(d, PersistenceMeasure) else to_measure(d, clip)
                for d in diagrams]
    pts = [mu.points for mu in measures if len(mu)]
    if not pts:
        return PersistenceMeasure.empty()
    w = 1.0 / len(measures)
    masses = np.concatenate([mu.masses * w for mu in measures if len(mu)])
    ess = np.concatenate([mu.essential for mu in measures if len(mu)])
    return _merge_atoms(np.vstack(pts), masses, ess)


def _ground(q: float, essential: str):
    if math.isinf(q):
        return lambda a, b: bottleneck(a, b, essential=essential)
    return lambda a, b: wasserstein_p(a, b, q, essential=essential)


def coupled_cost(samples_a, samples_b, p: float, ground_q: float = math.inf,
                 essential: str = "clip") -> float:
    """``W_p`` cost of the index coupling ``a[i] <-> b[i]`` (an upper bound)."""
    if len(samples_a) != len(samples_b) or not samples_a:
        raise InvalidInputError("coupled samples must be nonempty and aligned")
    ground = _ground(ground_q, essential)
    costs = np.array([ground(a, b) for a, b in zip(samples_a, samples_b)])
    return float(np.mean(costs ** p) ** (1.0 / p))


def wasserstein_between_distributions(samples_a, samples_b, p: float = 2.0,
                                      ground_q: float = math.inf,
                                      essential: str = "clip",
                                      cost_matrix: np.ndarray | None = None) -> float:
    """``W_p`` between the empirical laws of two samples of measures.

    The ground distance is ``d_q`` between persistence measures (bottleneck
    for ``q = inf``).  Equal sample sizes are solved as an assignment;
    otherwise uniform weights are scaled to integers and transported.
    """
    if not p >= 1 or math.isinf(p):
        raise InvalidInputError("p must be finite and >= 1")
    na, nb = len(samples_a), len(samples_b)
    if na == 0 or nb == 0:
        raise InvalidInputError("sample lists must be nonempty")
    if cost_matrix is None:
        ground = _ground(ground_q, essential)
        D = np.array([[ground(a, b) for b in samples_b] for a in samples_a])
    else:
        D = np.asarray(cost_matrix, dtype=float)
    C = D ** p
    if na == nb:
        r, c = linear_sum_assignment(C)
        return float((C[r, c].sum() / na) ** (1.0 / p))
    g = math.gcd(na, nb)
    flow, total = min_cost_transport(np.full(na, nb // g), np.full(nb, na // g), C)
    return float((total / (na * nb // g)) ** (1.0 / p))
