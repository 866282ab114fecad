"""Couplings of two group-valued distributions and the maximization of
pushforward entropies H(f(X, Y)) over the transportation polytope.

The solver is Frank-Wolfe with an exact transportation linear oracle; a
brute-force grid search over the (low-dimensional) polytope serves as an
independent cross-check, and ``d_hr`` packages the max-entropy coupling of
the difference map into a distance between distributions.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._fw import FwSolution, entropy_nats, maximize_aggregated_entropy
from .dist import Dist, shannon_entropy
from .groups import Coords, GroupSpec, LinearForm

__all__ = [
    "Coupling",
    "SolveResult",
    "transport_lmo",
    "pushforward_dist",
    "pushforward_entropy",
    "max_pushforward_entropy",
    "grid_oracle",
    "d_hr",
]

#: Marginal agreement tolerance for couplings.
MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class Coupling:
    """A joint distribution on ``support(row) x support(col)`` with the
    prescribed marginals, stored densely as a matrix."""

    row_marginal: Dist
    col_marginal: Dist
    mass: np.ndarray

    def __post_init__(self) -> None:
        mass = np.asarray(self.mass, dtype=float)
        if mass.shape != (len(self.row_marginal), len(self.col_marginal)):
            raise ValueError(
                f"mass shape {mass.shape} does not match supports "
                f"({len(self.row_marginal)}, {len(self.col_marginal)})"
            )
        if mass.min(initial=0.0) < -MARGINAL_TOL:
            raise ValueError(f"negative mass {mass.min()} in coupling")
        mass = np.maximum(mass, 0.0)
        row_err = np.abs(mass.sum(axis=1) - self.row_marginal.float_probs()).max()
        col_err = np.abs(mass.sum(axis=0) - self.col_marginal.float_probs()).max()
        if row_err > MARGINAL_TOL or col_err > MARGINAL_TOL:
            raise ValueError(
                f"marginal mismatch: row {row_err:.3e}, col {col_err:.3e}"
            )
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def independent(cls, row: Dist, col: Dist) -> "Coupling":
        r = np.array(row.float_probs())
        c = np.array(col.float_probs())
        return cls(row, col, np.outer(r, c))

    def support_size(self) -> int:
        return int((self.mass > 1e-14).sum())

    def is_extreme(self, eps: float = 1e-12) -> bool:
        """True when the support is a forest in the bipartite sense, which
        characterizes vertices of the transportation polytope."""
        m, n = self.mass.shape
        edges = [(i, j) for i in range(m) for j in range(n) if self.mass[i, j] > eps]
        parent = list(range(m + n))

        def find(u: int) -> int:
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        for i, j in edges:
            ri, rj = find(i), find(m + j)
            if ri == rj:
                return False
            parent[ri] = rj
        return True

    def to_json(self) -> dict:
        return {
            "row": self.row_marginal.to_json(),
            "col": self.col_marginal.to_json(),
            "mass": [[float(v) for v in row] for row in self.mass],
        }


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a pushforward-entropy maximization.

    ``value`` is the entropy at the returned coupling and ``duality_gap``
    bounds its distance from the true maximum; non-convergence within the
    iteration cap is reported via ``converged`` with the best iterate kept.
    """

    value: float
    coupling: Coupling
    duality_gap: float
    iterations: int
    converged: bool

    def to_json(self, include_coupling: bool = False) -> dict:
        obj = {
            "value": self.value,
            "duality_gap": self.duality_gap,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if include_coupling:
            obj["coupling"] = self.coupling.to_json()
        return obj


def _require_group_pair(row: Dist, col: Dist) -> GroupSpec:
    if row.group is None or col.group is None:
        raise ValueError("both marginals must carry a group")
    if row.group != col.group:
        raise ValueError(f"marginals on different groups: {row.group} vs {col.group}")
    return row.group


def _pushforward_map(
    row: Dist, col: Dist, form: LinearForm
) -> tuple[np.ndarray, list[Coords]]:
    """Flattened-cell aggregation map for f(x, y) over the support grid."""
    group = _require_group_pair(row, col)
    if len(form.support) != 2:
        raise ValueError(f"need a two-variable form, got {form}")
    z_index: dict[Coords, int] = {}
    agg = np.empty(len(row) * len(col), dtype=np.int64)
    cell = 0
    for x in row.atoms:
        for y in col.atoms:
            z = form.apply(group, (x, y))
            if z not in z_index:
                z_index[z] = len(z_index)
            agg[cell] = z_index[z]
            cell += 1
    outputs = sorted(z_index, key=z_index.get)
    return agg, outputs


def pushforward_dist(coupling: Coupling, form: LinearForm) -> Dist:
    """Distribution of f(X, Y) under the coupling."""
    agg, outputs = _pushforward_map(coupling.row_marginal, coupling.col_marginal, form)
    q = np.bincount(agg, weights=coupling.mass.ravel(), minlength=len(outputs))
    pairs = [(z, float(p)) for z, p in zip(outputs, q) if p > 0]
    return Dist(
        tuple(z for z, _ in pairs),
        tuple(p for _, p in pairs),
        coupling.row_marginal.group,
    )


def pushforward_entropy(coupling: Coupling, form: LinearForm) -> float:
    """Entropy in nats of f(X, Y) under the coupling."""
    agg, outputs = _pushforward_map(coupling.row_marginal, coupling.col_marginal, form)
    q = np.bincount(agg, weights=coupling.mass.ravel(), minlength=len(outputs))
    return entropy_nats(q)


def _min_cost_transport(
    supply: np.ndarray, demand: np.ndarray, cost: np.ndarray
) -> np.ndarray:
    """Exact minimizer of sum c_ij x_ij over the transportation polytope.

    Successive shortest paths on the source/rows/cols/sink network. Node
    potentials keep every residual reduced cost nonnegative, so each
    augmentation is a Dijkstra run whose predecessor graph is a tree; the
    returned flow is optimal and its support is a forest (an extreme
    point) up to degenerate cost ties.
    """
    m, n = cost.shape
    n_nodes = m + n + 2
    source, sink = m + n, m + n + 1
    arc_to: list[int] = []
    arc_cap: list[float] = []
    arc_cost: list[float] = []
    graph: list[list[int]] = [[] for _ in range(n_nodes)]

    def add_arc(u: int, v: int, cap: float, c: float) -> None:
        graph[u].append(len(arc_to))
        arc_to.append(v)
        arc_cap.append(cap)
        arc_cost.append(c)
        graph[v].append(len(arc_to))
        arc_to.append(u)
        arc_cap.append(0.0)
        arc_cost.append(-c)

    for i in range(m):
        add_arc(source, i, float(supply[i]), 0.0)
    for j in range(n):
        add_arc(m + j, sink, float(demand[j]), 0.0)
    for i in range(m):
        for j in range(n):
            add_arc(i, m + j, math.inf, float(cost[i, j]))

    # The zero-flow network is layered source -> rows -> cols -> sink, so
    # exact initial potentials come from one sweep.
    pot = [0.0] * n_nodes
    for j in range(n):
        pot[m + j] = min(float(cost[i, j]) for i in range(m))
    pot[sink] = min(pot[m + j] for j in range(n))

    remaining = float(supply.sum())
    guard = 4 * (m + 1) * (n + 1)
    for _ in range(guard):
        if remaining <= 1e-15:
            break
        dist = [math.inf] * n_nodes
        prev_arc = [-1] * n_nodes
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > dist[u]:
                continue
            for a in graph[u]:
                if arc_cap[a] <= 1e-15:
                    continue
                v = arc_to[a]
                reduced = arc_cost[a] + pot[u] - pot[v]
                if reduced < 0.0:
                    reduced = 0.0
                nd = du + reduced
                if nd < dist[v] - 1e-18:
                    dist[v] = nd
                    prev_arc[v] = a
                    heapq.heappush(heap, (nd, v))
        if dist[sink] == math.inf:
            break
        for v in range(n_nodes):
            if dist[v] < math.inf:
                pot[v] += dist[v]
        delta = remaining
        v = sink
        for _ in range(n_nodes):
            if v == source:
                break
            a = prev_arc[v]
            delta = min(delta, arc_cap[a])
            v = arc_to[a ^ 1]
        else:
            raise RuntimeError("augmenting path walk did not reach the source")
        v = sink
        while v != source:
            a = prev_arc[v]
            arc_cap[a] -= delta
            arc_cap[a ^ 1] += delta
            v = arc_to[a ^ 1]
        remaining -= delta
    if remaining > 1e-9:
        raise RuntimeError(f"transportation problem left {remaining} mass unrouted")
    flow = np.zeros((m, n))
    arc = 2 * (m + n)
    for i in range(m):
        for j in range(n):
            flow[i, j] = arc_cap[arc + 1]
            arc += 2
    return flow


def transport_lmo(row: Dist, col: Dist, cost: np.ndarray) -> Coupling:
    """Cheapest coupling for a per-cell cost matrix; the result is an
    extreme point of the transportation polytope."""
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (len(row), len(col)):
        raise ValueError(
            f"cost shape {cost.shape} does not match supports "
            f"({len(row)}, {len(col)})"
        )
    if not np.isfinite(cost).all():
        raise ValueError("cost entries must be finite")
    supply = np.array(row.float_probs())
    demand = np.array(col.float_probs())
    return Coupling(row, col, _min_cost_transport(supply, demand, cost))


def max_pushforward_entropy(
    row: Dist,
    col: Dist,
    form: LinearForm,
    tol: float = 1e-8,
    max_iter: int = 50_000,
    use_away: bool = True,
) -> SolveResult:
    """Maximize H(f(X, Y)) over couplings of the two marginals.

    Frank-Wolfe with the exact transportation oracle; the reported
    ``duality_gap`` certifies ``value >= maximum - duality_gap``.
    """
    agg, outputs = _pushforward_map(row, col, form)
    supply = np.array(row.float_probs())
    demand = np.array(col.float_probs())
    shape = (len(row), len(col))

    def lmo(cost_vec: np.ndarray):
        flow = _min_cost_transport(supply, demand, cost_vec.reshape(shape))
        key = frozenset(zip(*np.nonzero(flow > 1e-14)))
        return key, flow.ravel()

    sol = maximize_aggregated_entropy(
        agg, len(outputs), lmo, tol=tol, max_iter=max_iter, use_away=use_away
    )
    coupling = Coupling(row, col, sol.x.reshape(shape))
    return SolveResult(
        value=sol.value,
        coupling=coupling,
        duality_gap=sol.gap,
        iterations=sol.iterations,
        converged=sol.converged,
    )


def _complete_cells(theta: np.ndarray, r: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Fill the dependent last row/column of coupling candidates.

    ``theta`` has shape (N, m-1, n-1); the result has shape (N, m, n).
    """
    n_cand = theta.shape[0]
    m, n = r.size, c.size
    full = np.empty((n_cand, m, n))
    full[:, : m - 1, : n - 1] = theta
    full[:, : m - 1, n - 1] = r[: m - 1] - theta.sum(axis=2)
    full[:, m - 1, : n - 1] = c[: n - 1] - theta.sum(axis=1)
    full[:, m - 1, n - 1] = (
        1.0 - r[: m - 1].sum() - c[: n - 1].sum() + theta.sum(axis=(1, 2))
    )
    return full


def _grid_eval(
    axes: list[np.ndarray],
    r: np.ndarray,
    c: np.ndarray,
    agg: np.ndarray,
    n_out: int,
) -> tuple[float, np.ndarray | None]:
    """Best feasible entropy over the product grid of free cells."""
    mesh = np.meshgrid(*axes, indexing="ij")
    theta = np.stack([g.ravel() for g in mesh], axis=1)
    theta = theta.reshape(theta.shape[0], r.size - 1, c.size - 1)
    scatter = np.zeros((r.size * c.size, n_out))
    scatter[np.arange(agg.size), agg] = 1.0
    best_val, best_theta = -math.inf, None
    chunk = 200_000
    for start in range(0, theta.shape[0], chunk):
        block = theta[start : start + chunk]
        full = _complete_cells(block, r, c)
        feasible = (full >= -1e-12).all(axis=(1, 2))
        if not feasible.any():
            continue
        cells = np.maximum(full[feasible], 0.0).reshape(-1, r.size * c.size)
        q = cells @ scatter
        h = -np.where(q > 0, q * np.log(np.maximum(q, 1e-300)), 0.0).sum(axis=1)
        idx = int(np.argmax(h))
        if h[idx] > best_val:
            best_val = float(h[idx])
            best_theta = block[feasible][idx]
    return best_val, best_theta


def grid_oracle(
    row: Dist, col: Dist, form: LinearForm, resolution: float = 1e-3
) -> float:
    """Brute-force lower bound on max H(f(X, Y)) via a feasible grid.

    The free block of the coupling matrix is swept on a mesh; when the full
    mesh at the requested resolution is too large, the sweep starts coarse
    and repeatedly refines a shrinking box around the best point, which
    converges to the global maximum because the objective is concave. The
    returned value is always attained by a feasible coupling.
    """
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    agg, outputs = _pushforward_map(row, col, form)
    r = np.array(row.float_probs())
    c = np.array(col.float_probs())
    m, n = r.size, c.size
    dim = (m - 1) * (n - 1)
    if dim > 4:
        raise ValueError(
            f"free dimension {dim} too large to grid (supports {m} x {n})"
        )
    if dim == 0:
        q = np.bincount(agg, weights=np.outer(r, c).ravel(), minlength=len(outputs))
        return entropy_nats(q)

    lo = np.zeros(dim)
    hi = np.array(
        [min(r[i], c[j]) for i in range(m - 1) for j in range(n - 1)]
    )
    total_points = 1.0
    for d in range(dim):
        total_points *= math.floor((hi[d] - lo[d]) / resolution) + 1
    if total_points <= 2e6:
        axes = [
            np.arange(lo[d], hi[d] + 0.5 * resolution, resolution)
            for d in range(dim)
        ]
        val, _ = _grid_eval(axes, r, c, agg, len(outputs))
        return val

    points_per_dim = 11
    width = (hi - lo).copy()
    # Seed at the independent coupling, which is feasible for any pair of
    # marginals, so the shrinking box always has a feasible anchor.
    indep = np.outer(r, c)[: m - 1, : n - 1].ravel()
    q0 = np.bincount(agg, weights=np.outer(r, c).ravel(), minlength=len(outputs))
    center = indep
    best_val = entropy_nats(q0)
    while True:
        box_lo = np.maximum(center - width / 2, lo)
        box_hi = np.minimum(center + width / 2, hi)
        axes = [
            np.linspace(box_lo[d], box_hi[d], points_per_dim) for d in range(dim)
        ]
        val, theta = _grid_eval(axes, r, c, agg, len(outputs))
        if theta is not None and val > best_val:
            best_val = val
            center = theta.ravel()
        spacing = (box_hi - box_lo) / (points_per_dim - 1)
        if (spacing <= resolution).all():
            break
        width = 3.2 * spacing
    return best_val


def d_hr(row: Dist, col: Dist, tol: float = 1e-8) -> float:
    """Coupling-maximized entropy distance:
    max over couplings of H(X - Y), minus half the marginal entropies."""
    result = max_pushforward_entropy(row, col, LinearForm((1, -1)), tol=tol)
    return result.value - 0.5 * row.entropy() - 0.5 * col.entropy()
