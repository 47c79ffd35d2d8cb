"""Transportation problems with integer masses and real costs.

Successive shortest paths with Johnson potentials on the dense bipartite
residual graph.  Exact: every augmentation moves an integer amount of mass,
and optimality follows from nonnegative reduced costs.
"""

from __future__ import annotations

import math

import numpy as np

from ._errors import InvalidInputError, NumericalFailureError


def min_cost_transport(supply, demand, cost):
    """Minimise ``sum cost * flow`` subject to row sums ``supply`` and column
    sums ``demand``.  ``inf`` entries of ``cost`` are forbidden routes.

    Returns ``(flow, total_cost)`` with an integer flow matrix.
    """
    a = np.asarray(supply, dtype=np.int64).copy()
    b = np.asarray(demand, dtype=np.int64).copy()
    C = np.asarray(cost, dtype=float)
    n, m = C.shape
    if a.shape != (n,) or b.shape != (m,):
        raise InvalidInputError("supply/demand shapes do not match the cost matrix")
    if np.any(a < 0) or np.any(b < 0) or a.sum() != b.sum():
        raise InvalidInputError("masses must be nonnegative and balanced")
    flow = np.zeros((n, m), dtype=np.int64)
    if a.sum() == 0:
        return flow, 0.0
    allowed = np.isfinite(C)
    Cf = np.where(allowed, C, 0.0)
    phi_l = np.zeros(n)
    col_min = np.where(allowed, C, np.inf).min(axis=0)
    phi_r = np.where(np.isfinite(col_min), col_min, 0.0)

    while a.sum() > 0:
        dist_l = np.where(a > 0, 0.0, np.inf)
        dist_r = np.full(m, np.inf)
        prev_r = np.full(m, -1)       # left node feeding each right node
        prev_l = np.full(n, -1)       # right node feeding each left node (backward edge)
        done_l = np.zeros(n, dtype=bool)
        done_r = np.zeros(m, dtype=bool)
        target = -1
        while True:
            dl = np.where(done_l, np.inf, dist_l)
            dr = np.where(done_r, np.inf, dist_r)
            i, j = int(np.argmin(dl)), int(np.argmin(dr))
            if dl[i] == np.inf and dr[j] == np.inf:
                break
            if dl[i] <= dr[j]:
                done_l[i] = True
                reduced = Cf[i] + phi_l[i] - phi_r
                cand = np.where(allowed[i], dl[i] + np.maximum(reduced, 0.0), np.inf)
                better = (cand < dist_r) & ~done_r
                dist_r[better] = cand[better]
                prev_r[better] = i
            else:
                done_r[j] = True
                if b[j] > 0:
                    target = j
                    break
                back = flow[:, j] > 0
                reduced = -Cf[:, j] + phi_r[j] - phi_l
                cand = np.where(back, dr[j] + np.maximum(reduced, 0.0), np.inf)
                better = (cand < dist_l) & ~done_l
                dist_l[better] = cand[better]
                prev_l[better] = j
        if target < 0:
            raise NumericalFailureError("transportation problem is infeasible")
        reach = dist_r[target]
        phi_l += np.where(done_l, np.minimum(dist_l, reach), reach) - reach
        phi_r += np.where(done_r, np.minimum(dist_r, reach), reach) - reach

        # walk back to a source, collecting the bottleneck amount
        path = []
        j = target
        amount = b[target]
        while True:
            i = prev_r[j]
            path.append((i, j))
            if prev_l[i] < 0:
                break
            jb = prev_l[i]
            amount = min(amount, flow[i, jb])
            j = jb
        amount = min(amount, a[i])
        for k, (i2, j2) in enumerate(path):
            flow[i2, j2] += amount
            if k + 1 < len(path):
                flow[i2, path[k + 1][1]] -= amount
        a[i] -= amount
        b[target] -= amount
    total = math.fsum((Cf * flow).ravel())
    return flow, total
