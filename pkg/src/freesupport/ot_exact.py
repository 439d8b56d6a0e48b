"""Exact optimal transport under squared Euclidean cost.

The transportation LP is solved by a network simplex specialised to the
complete bipartite graph rows x columns:

* initial basis from the north-west-corner rule (always a spanning tree,
  degenerate zero-flow arcs included);
* entering arc by block search (the most negative reduced cost within the
  first block of ~sqrt(m n) arcs, scanned cyclically, that holds one); after a run of
  ``BLAND_AFTER`` degenerate pivots pricing falls back to Bland's rule
  (first arc in row-major order with negative reduced cost) until the
  objective strictly improves again, so degenerate stalls cannot cycle;
* leaving arc = smallest index among the tied blocking arcs.

Dual potentials are normalised so that the first row potential is zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .measures import DiscreteMeasure, MeasureError


class OTSolverError(RuntimeError):
    """The simplex failed to certify optimality within its pivot budget."""


def squared_distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # explicit differences; the |x|^2 + |y|^2 - 2<x,y> expansion cancels badly
    diff = x[:, None, :] - y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


@numba.njit(cache=True, nogil=True)
def _tree_potentials(cost, row_adj, row_deg, col_adj, col_deg, u, v, parent, depth, order):
    # BFS over the basis tree from row 0; nodes 0..m-1 are rows, m..m+n-1 columns
    m, n = cost.shape
    for k in range(m + n):
        parent[k] = -2
    parent[0] = -1
    depth[0] = 0
    u[0] = 0.0
    order[0] = 0
    head = 0
    tail = 1
    while head < tail:
        node = order[head]
        head += 1
        if node < m:
            for t in range(row_deg[node]):
                j = row_adj[node, t]
                c = m + j
                if parent[c] == -2:
                    parent[c] = node
                    depth[c] = depth[node] + 1
                    v[j] = cost[node, j] - u[node]
                    order[tail] = c
                    tail += 1
        else:
            j = node - m
            for t in range(col_deg[j]):
                i = col_adj[j, t]
                if parent[i] == -2:
                    parent[i] = node
                    depth[i] = depth[node] + 1
                    u[i] = cost[i, j] - v[j]
                    order[tail] = i
                    tail += 1
    return tail


@numba.njit(cache=True, nogil=True)
def _remove(adj, deg, row, value):
    for t in range(deg[row]):
        if adj[row, t] == value:
            adj[row, t] = adj[row, deg[row] - 1]
            deg[row] -= 1
            return


@numba.njit(cache=True, nogil=True)
def _network_simplex(a, b, cost, max_pivots, tol, bland_after):
    m, n = cost.shape
    flow = np.zeros((m, n))
    row_adj = np.empty((m, n), dtype=np.int64)
    col_adj = np.empty((n, m), dtype=np.int64)
    row_deg = np.zeros(m, dtype=np.int64)
    col_deg = np.zeros(n, dtype=np.int64)

    # north-west corner: exactly m + n - 1 cells, a spanning tree
    ra = a.copy()
    cb = b.copy()
    i = 0
    j = 0
    while True:
        row_adj[i, row_deg[i]] = j
        row_deg[i] += 1
        col_adj[j, col_deg[j]] = i
        col_deg[j] += 1
        if i == m - 1 and j == n - 1:
            flow[i, j] = max(min(ra[i], cb[j]), 0.0)
            break
        if i == m - 1:
            x = cb[j]
            flow[i, j] = max(x, 0.0)
            ra[i] -= x
            j += 1
        elif j == n - 1 or ra[i] <= cb[j]:
            x = ra[i]
            flow[i, j] = max(x, 0.0)
            cb[j] -= x
            i += 1
        else:
            x = cb[j]
            flow[i, j] = max(x, 0.0)
            ra[i] -= x
            j += 1

    u = np.zeros(m)
    v = np.zeros(n)
    parent = np.empty(m + n, dtype=np.int64)
    depth = np.empty(m + n, dtype=np.int64)
    order = np.empty(m + n, dtype=np.int64)
    path_r = np.empty(m + n, dtype=np.int64)
    path_c = np.empty(m + n, dtype=np.int64)

    total = m * n
    block = max(int(np.sqrt(total)), 10)
    cursor = 0
    pivots = 0
    degenerate_run = 0
    while True:
        _tree_potentials(cost, row_adj, row_deg, col_adj, col_deg, u, v, parent, depth, order)

        ei = -1
        ej = -1
        if degenerate_run < bland_after:
            # block search: scan blocks of arcs cyclically from where the last
            # search stopped; the most negative arc of the first block that
            # has one enters
            best = -tol
            scanned = 0
            while scanned < total:
                stop = min(scanned + block, total)
                while scanned < stop:
                    r = cursor // n
                    c = cursor - r * n
                    red = cost[r, c] - u[r] - v[c]
                    if red < best:
                        best = red
                        ei = r
                        ej = c
                    cursor += 1
                    if cursor == total:
                        cursor = 0
                    scanned += 1
                if ei >= 0:
                    break
        else:
            # Bland: lowest-index arc with negative reduced cost enters
            for r in range(m):
                ur = u[r]
                for c in range(n):
                    if cost[r, c] - ur - v[c] < -tol:
                        ei = r
                        ej = c
                        break
                if ei >= 0:
                    break
        if ei < 0:
            return flow, u, v, pivots, True
        if pivots >= max_pivots:
            return flow, u, v, pivots, False
        pivots += 1

        # tree path column ej -> row ei; arc signs alternate starting with '-'
        x = m + ej
        y = ei
        nx = 0
        ny = 0
        while x != y:
            if depth[x] >= depth[y]:
                p = parent[x]
                if x < m:
                    path_r[nx] = x
                    path_c[nx] = p - m
                else:
                    path_r[nx] = p
                    path_c[nx] = x - m
                nx += 1
                x = p
            else:
                p = parent[y]
                if y < m:
                    path_r[m + n - 1 - ny] = y
                    path_c[m + n - 1 - ny] = p - m
                else:
                    path_r[m + n - 1 - ny] = p
                    path_c[m + n - 1 - ny] = y - m
                ny += 1
                y = p
        # stitch the row-side segment (stored backwards) after the column side
        for t in range(ny):
            src = m + n - ny + t
            path_r[nx + t] = path_r[src]
            path_c[nx + t] = path_c[src]
        length = nx + ny

        theta = np.inf
        li = -1
        lj = -1
        for t in range(0, length, 2):
            r = path_r[t]
            c = path_c[t]
            f = flow[r, c]
            if f < theta or (f == theta and r * n + c < li * n + lj):
                theta = f
                li = r
                lj = c
        if theta < 0.0:
            theta = 0.0

        if theta > 0.0:
            degenerate_run = 0
            for t in range(length):
                r = path_r[t]
                c = path_c[t]
                if t % 2 == 0:
                    flow[r, c] -= theta
                else:
                    flow[r, c] += theta
            flow[ei, ej] += theta
        else:
            degenerate_run += 1
        flow[li, lj] = 0.0

        _remove(row_adj, row_deg, li, lj)
        _remove(col_adj, col_deg, lj, li)
        row_adj[ei, row_deg[ei]] = ej
        row_deg[ei] += 1
        col_adj[ej, col_deg[ej]] = ei
        col_deg[ej] += 1


@dataclass(frozen=True)
class TransportPlan:
    """Optimal coupling with its cost and dual certificate.

    ``matrix`` has shape (m, m'); ``row_potentials`` and ``col_potentials``
    satisfy ``f_i + g_j <= c_ij`` with equality on the basis.
    """

    matrix: np.ndarray
    source_weights: np.ndarray
    target_weights: np.ndarray
    cost: float
    row_potentials: np.ndarray
    col_potentials: np.ndarray
    pivots: int = 0

    @property
    def shape(self):
        return self.matrix.shape


# consecutive degenerate pivots tolerated before pricing switches to Bland
BLAND_AFTER = 50


def pivot_cap(m: int, n: int) -> int:
    return 50 * (m + n) * max(m, n)


def solve_ot_weights(a, b, cost: np.ndarray) -> TransportPlan:
    """Solve the transportation LP for marginals ``a``, ``b`` and a cost matrix."""
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    cost = np.ascontiguousarray(cost, dtype=float)
    m, n = cost.shape
    if a.shape != (m,) or b.shape != (n,):
        raise MeasureError(f"marginals {a.shape}, {b.shape} do not fit cost {cost.shape}")
    tol = 1e-12 * (1.0 + float(np.abs(cost).max(initial=0.0)))
    flow, u, v, pivots, ok = _network_simplex(a, b, cost, pivot_cap(m, n), tol, BLAND_AFTER)
    if not ok:
        raise OTSolverError(f"network simplex hit the pivot cap ({pivots}) on a {m}x{n} problem")
    flow[flow < 0.0] = 0.0
    return TransportPlan(
        matrix=flow,
        source_weights=a,
        target_weights=b,
        cost=float(np.sum(flow * cost)),
        row_potentials=u,
        col_potentials=v,
        pivots=int(pivots),
    )


def solve_ot(source: DiscreteMeasure, target: DiscreteMeasure) -> TransportPlan:
    """Optimal plan between two measures for the cost ``|z - x|^2``."""
    if source.dim != target.dim:
        raise MeasureError(f"dimension mismatch: {source.dim} vs {target.dim}")
    cost = squared_distances(source.support, target.support)
    return solve_ot_weights(source.weights, target.weights, cost)


def w2_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    return float(np.sqrt(max(solve_ot(a, b).cost, 0.0)))


def dual_gap(plan: TransportPlan, cost: np.ndarray) -> tuple[float, float]:
    """Worst dual infeasibility and worst slackness violation on the support.

    Returns ``(max(f_i + g_j - c_ij, 0), max |c_ij - f_i - g_j| where plan > 0)``.
    """
    reduced = cost - plan.row_potentials[:, None] - plan.col_potentials[None, :]
    infeasible = float(max(-reduced.min(), 0.0))
    active = plan.matrix > 0
    slack = float(np.abs(reduced[active]).max(initial=0.0))
    return infeasible, slack
