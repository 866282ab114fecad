"""Magnification ratio of a bipartite graph and its entropic counterpart.

The combinatorial side minimizes |N(S)|/|S| exactly over nonempty input
subsets. The entropic side maximizes H(output) - H(input) over channels
supported on graph edges (an inner concave program per input law), then
minimizes over input laws; at the optimum the two agree:

    min over P of max over channels of [H(Y) - H(X)]  =  log mu.

A KKT certificate, the induced partition of inputs and outputs into
equal-level classes, and the one-parameter mass-reweighting path along
which the inner value stays flat round out the toolkit.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from ._fw import LOG_FLOOR, entropy_nats, maximize_aggregated_entropy
from .coupling import _min_cost_transport
from .dist import Dist

__all__ = [
    "BipartiteGraph",
    "Channel",
    "MuResult",
    "InnerMaxResult",
    "LambdaResult",
    "KktCertificate",
    "EquivClass",
    "ClassPartition",
    "neighborhood",
    "mu_combinatorial",
    "inner_max",
    "lambda_entropic",
    "kkt_check",
    "equivalence_classes",
    "reweight_path",
]

#: Channel entries below this are treated as inactive edges.
ACTIVE_EPS = 1e-12


@dataclass(frozen=True)
class BipartiteGraph:
    """A bipartite graph on labelled left and right vertex sets.

    Every vertex must touch at least one edge; duplicate labels and edges
    are rejected rather than silently merged.
    """

    left: tuple
    right: tuple
    edges: tuple[tuple, ...]

    def __post_init__(self) -> None:
        left = tuple(self.left)
        right = tuple(self.right)
        edges = tuple((a, b) for a, b in self.edges)
        if not left or not right:
            raise ValueError("both vertex sets must be nonempty")
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise ValueError("duplicate vertex labels")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        left_set, right_set = set(left), set(right)
        for a, b in edges:
            if a not in left_set or b not in right_set:
                raise ValueError(f"edge ({a!r}, {b!r}) uses unknown vertices")
        touched_left = {a for a, _ in edges}
        touched_right = {b for _, b in edges}
        if touched_left != left_set or touched_right != right_set:
            isolated = (left_set - touched_left) | (right_set - touched_right)
            raise ValueError(f"isolated vertices: {sorted(map(repr, isolated))}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def complete(cls, left: Sequence, right: Sequence) -> "BipartiteGraph":
        return cls(
            tuple(left),
            tuple(right),
            tuple((a, b) for a in left for b in right),
        )

    def out_neighbors(self, a: Hashable) -> tuple:
        return tuple(b for x, b in self.edges if x == a)

    def to_json(self) -> dict:
        return {
            "left": list(self.left),
            "right": list(self.right),
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BipartiteGraph":
        return cls(
            tuple(obj["left"]),
            tuple(obj["right"]),
            tuple(tuple(e) for e in obj["edges"]),
        )


def neighborhood(graph: BipartiteGraph, subset: Iterable) -> frozenset:
    """Right vertices adjacent to at least one vertex of the subset."""
    subset = set(subset)
    unknown = subset - set(graph.left)
    if unknown:
        raise ValueError(f"not left vertices: {sorted(map(repr, unknown))}")
    return frozenset(b for a, b in graph.edges if a in subset)


@dataclass(frozen=True)
class MuResult:
    """Exact minimum of |N(S)|/|S| with one witnessing subset."""

    ratio: Fraction
    argmin: tuple

    @property
    def log_ratio(self) -> float:
        return math.log(self.ratio)


def mu_combinatorial(graph: BipartiteGraph, max_left: int = 20) -> MuResult:
    """Exhaustive scan of all nonempty input subsets.

    Ties are broken toward the subset whose sorted label tuple is smallest.
    """
    n = len(graph.left)
    if n > max_left:
        raise ValueError(f"left side has {n} > {max_left} vertices")
    order = sorted(range(n), key=lambda i: graph.left[i])
    nbr_mask = {a: 0 for a in graph.left}
    right_index = {b: i for i, b in enumerate(graph.right)}
    for a, b in graph.edges:
        nbr_mask[a] |= 1 << right_index[b]
    best: tuple[Fraction, tuple] | None = None
    for mask in range(1, 1 << n):
        members = [graph.left[order[i]] for i in range(n) if mask >> i & 1]
        hood = 0
        for a in members:
            hood |= nbr_mask[a]
        ratio = Fraction(hood.bit_count(), len(members))
        key = (ratio, tuple(sorted(members)))
        if best is None or key < best:
            best = key
    assert best is not None
    return MuResult(ratio=best[0], argmin=best[1])


@dataclass(frozen=True)
class Channel:
    """A stochastic map from left to right vertices supported on edges."""

    graph: BipartiteGraph
    rows: Mapping[Hashable, Mapping[Hashable, float]]

    def __post_init__(self) -> None:
        rows = {a: dict(row) for a, row in self.rows.items()}
        edge_set = set(self.graph.edges)
        if set(rows) != set(self.graph.left):
            raise ValueError("channel must define a row for every left vertex")
        for a, row in rows.items():
            for b, w in row.items():
                if (a, b) not in edge_set:
                    raise ValueError(f"mass on non-edge ({a!r}, {b!r})")
                if w < -1e-12:
                    raise ValueError(f"negative channel entry {w} at ({a!r}, {b!r})")
            total = math.fsum(row.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"row {a!r} sums to {total!r}")
        object.__setattr__(self, "rows", rows)

    def prob(self, a: Hashable, b: Hashable) -> float:
        return float(self.rows[a].get(b, 0.0))

    def output_masses(self, p_x: Dist) -> dict:
        """Full output mass vector (no pruning) induced by an input law."""
        out = {b: 0.0 for b in self.graph.right}
        for a, p in zip(p_x.atoms, p_x.probs):
            for b, w in self.rows[a].items():
                out[b] += float(p) * w
        return out

    def output_dist(self, p_x: Dist) -> Dist:
        masses = self.output_masses(p_x)
        pairs = [(b, q) for b, q in masses.items() if q > 1e-300]
        return Dist(tuple(b for b, _ in pairs), tuple(q for _, q in pairs))

    def to_json(self) -> dict:
        return {
            "rows": {
                repr(a): {repr(b): w for b, w in row.items()}
                for a, row in self.rows.items()
            }
        }


@dataclass(frozen=True)
class InnerMaxResult:
    value: float
    channel: Channel
    output: Dist
    duality_gap: float
    iterations: int
    converged: bool


def _check_input_dist(graph: BipartiteGraph, p_x: Dist) -> list:
    support = [a for a in p_x.atoms]
    unknown = set(support) - set(graph.left)
    if unknown:
        raise ValueError(f"input law charges non-vertices: {sorted(map(repr, unknown))}")
    return support


def inner_max(
    graph: BipartiteGraph,
    p_x: Dist,
    tol: float = 1e-8,
    max_iter: int = 50_000,
) -> InnerMaxResult:
    """Maximize H(Y) - H(X) over channels supported on graph edges.

    Frank-Wolfe whose oracle picks, per input vertex, the single cheapest
    outgoing edge. The converged iterate is then polished onto its active
    support: within each connected component of active edges the optimal
    output level is exactly (component input mass) / (component outputs),
    and an exact flow with those marginals is rebuilt; the polish is kept
    only if its own gap certificate is at least as good.
    """
    support = _check_input_dist(graph, p_x)
    masses = {a: float(p) for a, p in zip(p_x.atoms, p_x.probs)}
    edges = [
        (a, b) for a, b in graph.edges if a in masses
    ]
    outputs = sorted(
        {b for _, b in edges}, key=lambda b: graph.right.index(b)
    )
    out_index = {b: i for i, b in enumerate(outputs)}
    row_edges: dict[Hashable, list[int]] = {a: [] for a in support}
    for idx, (a, b) in enumerate(edges):
        row_edges[a].append(idx)
    agg = np.array([out_index[b] for _, b in edges], dtype=np.int64)
    row_order = sorted(support, key=lambda a: graph.left.index(a))

    def lmo(cost: np.ndarray):
        x = np.zeros(len(edges))
        choice = []
        for a in row_order:
            idxs = row_edges[a]
            best = min(idxs, key=lambda i: cost[i])
            x[best] = masses[a]
            choice.append(best)
        return tuple(choice), x

    sol = maximize_aggregated_entropy(
        agg, len(outputs), lmo, tol=tol, max_iter=max_iter
    )
    x, gap = sol.x, sol.gap
    polished = _polish_active_support(
        edges, outputs, out_index, row_edges, masses, row_order, agg, x, lmo, tol
    )
    if polished is not None:
        px_, gap_, val_ = polished
        if gap_ <= max(gap, tol) and val_ >= sol.value - tol:
            x, gap = px_, gap_
            sol.value = val_
            sol.converged = gap <= tol
    q = np.bincount(agg, weights=x, minlength=len(outputs))
    rows: dict = {}
    for a in graph.left:
        if a in masses:
            rows[a] = {
                edges[i][1]: x[i] / masses[a]
                for i in row_edges[a]
                if x[i] > 0.0
            }
        else:
            nbrs = graph.out_neighbors(a)
            rows[a] = {b: 1.0 / len(nbrs) for b in nbrs}
    channel = Channel(graph, rows)
    out_pairs = [(b, q[out_index[b]]) for b in outputs if q[out_index[b]] > 1e-300]
    # The rebuilt flow may under-route by ~1e-11; renormalize the marginal.
    q_total = math.fsum(p for _, p in out_pairs)
    output = Dist(
        tuple(b for b, _ in out_pairs), tuple(p / q_total for _, p in out_pairs)
    )
    h_x = p_x.entropy()
    return InnerMaxResult(
        value=sol.value - h_x,
        channel=channel,
        output=output,
        duality_gap=gap,
        iterations=sol.iterations,
        converged=sol.converged,
    )


def _polish_active_support(
    edges, outputs, out_index, row_edges, masses, row_order, agg, x, lmo, tol
):
    """Rebuild the iterate as an exact flow with per-component uniform
    output levels on its active support. Returns (x, gap, value) or None."""
    active = [i for i in range(len(edges)) if x[i] > 1e-10]
    if not active:
        return None
    # Union-find over input and output vertices through active edges.
    parent: dict = {}

    def find(u):
        parent.setdefault(u, u)
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    def union(u, v):
        parent[find(u)] = find(v)

    for i in active:
        a, b = edges[i]
        union(("L", a), ("R", b))
    components: dict = {}
    for a in row_order:
        components.setdefault(find(("L", a)), {"in": [], "out": []})["in"].append(a)
    for b in outputs:
        root = find(("R", b))
        if root in components:
            components[root]["out"].append(b)
    new_x = np.zeros_like(x)
    for comp in components.values():
        ins, outs = comp["in"], comp["out"]
        if not outs:
            return None
        level = math.fsum(masses[a] for a in ins) / len(outs)
        # Exact transportation flow on the graph edges inside the component.
        sub_rows = {a: i for i, a in enumerate(ins)}
        sub_cols = {b: j for j, b in enumerate(outs)}
        cell_edges = {}
        for i in active:
            a, b = edges[i]
            if a in sub_rows and b in sub_cols:
                cell_edges[(sub_rows[a], sub_cols[b])] = i
        for idx, (a, b) in enumerate(edges):
            if a in sub_rows and b in sub_cols:
                cell_edges.setdefault((sub_rows[a], sub_cols[b]), idx)
        cost = np.full((len(ins), len(outs)), 1.0)
        for (i, j) in cell_edges:
            cost[i, j] = 0.0
        supply = np.array([masses[a] for a in ins])
        demand = np.full(len(outs), level)
        try:
            flow = _min_cost_transport(supply, demand, cost)
        except RuntimeError:
            return None
        # Reject if mass leaked onto forbidden cells (non-edges).
        for i in range(len(ins)):
            for j in range(len(outs)):
                if flow[i, j] > 1e-11:
                    if (i, j) not in cell_edges:
                        return None
                    new_x[cell_edges[(i, j)]] += flow[i, j]
    q = np.bincount(agg, weights=new_x, minlength=len(outputs))
    grad = -(np.log(np.maximum(q, LOG_FLOOR)) + 1.0)[agg]
    _, s = lmo(-grad)
    gap = float(grad @ (s - new_x))
    return new_x, gap, entropy_nats(q)


@dataclass(frozen=True)
class KktCertificate:
    """Dual reconstruction for an inner maximizer.

    ``lambdas`` are per-input multipliers for the row-sum constraints and
    ``mus`` per-edge nonnegative multipliers; ``max_violation`` is the
    largest stationarity residual or complementary-slackness product.
    """

    lambdas: dict
    mus: dict
    max_violation: float

    def passes(self, tol: float = 1e-6) -> bool:
        return self.max_violation <= tol


def kkt_check(
    graph: BipartiteGraph, p_x: Dist, channel: Channel, tol: float = 1e-6
) -> KktCertificate:
    """Reconstruct duals for the inner maximization at a candidate channel.

    At an exact maximizer, for every charged input all active edges hit
    outputs of one common mass level and no inactive edge undercuts that
    level (otherwise rerouting mass to the lighter output would raise the
    output entropy); the residuals below are zero precisely in that case.
    """
    _check_input_dist(graph, p_x)
    q = channel.output_masses(p_x)
    lambdas: dict = {}
    mus: dict = {}
    worst = 0.0
    for a, p in zip(p_x.atoms, p_x.probs):
        p = float(p)
        if p <= ACTIVE_EPS:
            continue
        row = channel.rows[a]
        active_levels = [q[b] for b, w in row.items() if w > ACTIVE_EPS]
        if not active_levels:
            raise ValueError(f"input {a!r} has positive mass but no active edge")
        level = min(active_levels)
        lam = p * (math.log(max(level, LOG_FLOOR)) + 1.0)
        lambdas[a] = lam
        for b in (b for x, b in graph.edges if x == a):
            stat = p * (math.log(max(q[b], LOG_FLOOR)) + 1.0) - lam
            mu = max(0.0, stat)
            mus[(a, b)] = mu
            residual = abs(stat - mu)
            slackness = mu * channel.prob(a, b)
            worst = max(worst, residual, slackness)
    return KktCertificate(lambdas=lambdas, mus=mus, max_violation=worst)


@dataclass(frozen=True)
class EquivClass:
    """Inputs and outputs sharing one output mass level."""

    inputs: tuple
    outputs: tuple
    mass: float
    level: float


@dataclass(frozen=True)
class ClassPartition:
    classes: tuple[EquivClass, ...]

    def __len__(self) -> int:
        return len(self.classes)


def equivalence_classes(
    graph: BipartiteGraph,
    p_x: Dist,
    channel: Channel,
    level_tol: float = 1e-9,
    kkt_tol: float = 1e-6,
) -> ClassPartition:
    """Partition charged inputs and reached outputs by output mass level.

    Classes are ordered by strictly decreasing level; the channel must
    pass the KKT check at ``kkt_tol``.
    """
    cert = kkt_check(graph, p_x, channel, tol=kkt_tol)
    if not cert.passes(kkt_tol):
        raise ValueError(
            f"channel is not an inner maximizer (violation {cert.max_violation:.3e})"
        )
    masses = {a: float(p) for a, p in zip(p_x.atoms, p_x.probs)}
    support = [a for a in p_x.atoms]
    hood = neighborhood(graph, support)
    q = channel.output_masses(p_x)
    reached = sorted(hood, key=lambda b: graph.right.index(b))
    for b in reached:
        if q[b] <= ACTIVE_EPS:
            raise ValueError(
                f"output {b!r} is reachable but uncharged; channel not optimal"
            )
    by_level = sorted(reached, key=lambda b: -q[b])
    groups: list[list] = []
    for b in by_level:
        if groups and abs(q[groups[-1][-1]] - q[b]) <= level_tol:
            groups[-1].append(b)
        else:
            groups.append([b])
    member: dict = {}
    for ci, grp in enumerate(groups):
        for b in grp:
            member[b] = ci
    classes_in: list[list] = [[] for _ in groups]
    for a in support:
        targets = {
            member[b] for b, w in channel.rows[a].items() if w > ACTIVE_EPS
        }
        if len(targets) != 1:
            raise ValueError(
                f"input {a!r} has active edges into distinct levels {sorted(targets)}"
            )
        classes_in[targets.pop()].append(a)
    classes = []
    for ci, grp in enumerate(groups):
        if not classes_in[ci]:
            raise ValueError(
                f"outputs {grp!r} have a level but no supporting inputs"
            )
        mass = math.fsum(masses[a] for a in classes_in[ci])
        classes.append(
            EquivClass(
                inputs=tuple(sorted(classes_in[ci], key=graph.left.index)),
                outputs=tuple(sorted(grp, key=graph.right.index)),
                mass=mass,
                level=mass / len(grp),
            )
        )
    return ClassPartition(classes=tuple(classes))


def reweight_path(
    graph: BipartiteGraph,
    p_x: Dist,
    channel: Channel,
    alpha: float,
    kkt_tol: float = 1e-6,
) -> Dist:
    """Move input mass from the top class to the second class.

    At parameter alpha the first class is scaled by (1 - alpha/p1) and the
    second by (1 + alpha/p2). The admissible range is [alpha_min,
    alpha_max] where alpha_max equalizes the first two levels and
    alpha_min either empties the second class (two classes) or lowers its
    level to the third class's.
    """
    partition = equivalence_classes(graph, p_x, channel, kkt_tol=kkt_tol)
    if len(partition) < 2:
        raise ValueError("reweighting needs at least two classes")
    c1, c2 = partition.classes[0], partition.classes[1]
    p1, n1 = c1.mass, len(c1.outputs)
    p2, n2 = c2.mass, len(c2.outputs)
    alpha_max = (p1 * n2 - p2 * n1) / (n1 + n2)
    if len(partition) >= 3:
        c3 = partition.classes[2]
        alpha_min = n2 * (c3.mass / len(c3.outputs) - p2 / n2)
    else:
        alpha_min = -p2
    if not (alpha_min - 1e-12 <= alpha <= alpha_max + 1e-12):
        raise ValueError(
            f"alpha {alpha} outside [{alpha_min}, {alpha_max}]"
        )
    scale1 = 1.0 - alpha / p1
    scale2 = 1.0 + alpha / p2
    in1, in2 = set(c1.inputs), set(c2.inputs)
    atoms, probs = [], []
    for a, p in zip(p_x.atoms, p_x.probs):
        p = float(p)
        if a in in1:
            p *= scale1
        elif a in in2:
            p *= scale2
        atoms.append(a)
        probs.append(p)
    return Dist(tuple(atoms), tuple(probs))


@dataclass(frozen=True)
class LambdaResult:
    """Outer minimization of the inner maximum over input laws."""

    value: float
    p_x: Dist
    channel: Channel
    subset_value: float
    subset_argmin: tuple
    gradient_value: float
    discrepancy: bool


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def lambda_entropic(
    graph: BipartiteGraph,
    tol: float = 1e-8,
    starts: int = 20,
    seed: int = 0,
    pgd_iters: int = 40,
    max_left: int = 20,
) -> LambdaResult:
    """Minimize the inner maximum over input laws.

    Authoritative search: evaluate the uniform law on every nonempty input
    subset (an optimizer of this form exists). Cross-check: projected
    gradient descent on the simplex from ``starts`` random points; a
    discrepancy is flagged only if the gradient search wins by more than
    ``10 * tol``, which would contradict the subset structure.
    """
    n = len(graph.left)
    if n > max_left:
        raise ValueError(f"left side has {n} > {max_left} vertices")
    best_subset: tuple[float, tuple, InnerMaxResult, Dist] | None = None
    for size in range(1, n + 1):
        for combo in itertools.combinations(graph.left, size):
            p = Dist.uniform(combo)
            res = inner_max(graph, p, tol=tol)
            key = (res.value, tuple(sorted(combo)))
            if best_subset is None or key < (best_subset[0], best_subset[1]):
                best_subset = (res.value, key[1], res, p)
    assert best_subset is not None
    subset_value, subset_argmin, subset_res, subset_p = best_subset

    rng = random.Random(seed)
    grad_value, grad_point = math.inf, None
    loose = max(tol, 1e-6)
    for _ in range(starts):
        weights = np.array([-math.log(rng.random()) for _ in range(n)])
        p_vec = weights / weights.sum()
        best_here, best_vec = math.inf, p_vec
        for it in range(pgd_iters):
            p = Dist(tuple(graph.left), tuple(p_vec))
            res = inner_max(graph, p, tol=loose)
            val = res.value
            if val < best_here:
                best_here, best_vec = val, p_vec.copy()
            q = res.channel.output_masses(p)
            grad = np.empty(n)
            for i, a in enumerate(graph.left):
                push = sum(
                    w * (math.log(max(q[b], 1e-12)) + 1.0)
                    for b, w in res.channel.rows[a].items()
                )
                grad[i] = -push + math.log(max(p_vec[i], 1e-12)) + 1.0
            step = 0.5 / math.sqrt(it + 1.0)
            p_vec = _project_simplex(p_vec - step * grad)
            p_vec = np.maximum(p_vec, 0.0)
            total = p_vec.sum()
            p_vec /= total
        final = inner_max(graph, Dist(tuple(graph.left), tuple(best_vec)), tol=tol)
        if final.value < grad_value:
            grad_value, grad_point = final.value, best_vec

    discrepancy = grad_value < subset_value - 10.0 * tol
    if discrepancy and grad_point is not None:
        p = Dist(tuple(graph.left), tuple(grad_point))
        res = inner_max(graph, p, tol=tol)
        return LambdaResult(
            value=res.value,
            p_x=p,
            channel=res.channel,
            subset_value=subset_value,
            subset_argmin=subset_argmin,
            gradient_value=grad_value,
            discrepancy=True,
        )
    return LambdaResult(
        value=subset_value,
        p_x=subset_p,
        channel=subset_res.channel,
        subset_value=subset_value,
        subset_argmin=subset_argmin,
        gradient_value=grad_value,
        discrepancy=discrepancy,
    )
