"""Randomized verification harness.

Every registered check draws reproducible random instances (sets, joints,
graphs) at desk scale, evaluates one inequality or identity with exact or
gap-certified arithmetic, and reports the worst signed slack seen. Slack
is right-hand side minus left-hand side, so violations are negative;
checks whose sides involve a gap-certified maximization get a slack
allowance of ten times the solver tolerance, and identity checks flag any
residual above their stated bound.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .coupling import grid_oracle, max_pushforward_entropy
from .dist import Dist
from .groups import FiniteSet, GroupSpec, LinearForm, restricted_sumset, ruzsa_distance, sumset
from .magnification import BipartiteGraph
from .markov import (
    ChainSpec,
    JointDist,
    build_four_copy_chain,
    build_sum_diff_coupling,
    independent_sum_diff_slack,
    sum_diff_slack,
    verify_copy_identity,
)

__all__ = [
    "HarnessConfig",
    "TrialOutcome",
    "SuiteReport",
    "WitnessReport",
    "REGISTRY",
    "registry_ids",
    "generate_instance",
    "run_suite",
    "ordering_witnesses",
]

DIFF = LinearForm((1, -1))
SUM = LinearForm((1, 1))

#: Slack below this counts as a violation for exact-arithmetic checks.
BASE_THRESHOLD = -1e-9

#: Residual bound for identity checks.
IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class HarnessConfig:
    """Sizing and tolerance knobs for the randomized checks."""

    tol: float = 1e-8
    max_set: int = 5
    max_support: int = 5
    box_radius: int = 4
    denominator: int = 64
    max_chain_len: int = 4

    def to_json(self) -> dict:
        return {
            "tol": self.tol,
            "max_set": self.max_set,
            "max_support": self.max_support,
            "box_radius": self.box_radius,
            "denominator": self.denominator,
            "max_chain_len": self.max_chain_len,
        }


@dataclass(frozen=True)
class TrialOutcome:
    slack: float
    violated: bool


@dataclass(frozen=True)
class SuiteReport:
    """Aggregate of a randomized run: worst slack and violation count."""

    id: str
    trials: int
    seed: int
    min_slack: float
    worst_instance: dict
    violations: int
    config: HarnessConfig

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "id": self.id,
            "trials": self.trials,
            "seed": self.seed,
            "min_slack": self.min_slack,
            "worst_instance": self.worst_instance,
            "violations": self.violations,
            "config": self.config.to_json(),
        }


def _trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(seed * 1_000_003 + trial)


# ---------------------------------------------------------------------------
# Instance generators. Instances are JSON-ready dicts with integer data so
# that rebuilt objects are exact.
# ---------------------------------------------------------------------------


def _sample_group(rng: random.Random, torsion_ok: bool) -> GroupSpec:
    u = rng.random()
    if u < 0.5:
        return GroupSpec.integers(1)
    if u < 0.75:
        return GroupSpec.integers(2)
    if torsion_ok:
        return GroupSpec.cyclic(rng.randint(2, 7))
    return GroupSpec.integers(1)


def _sample_coords(rng: random.Random, group: GroupSpec, radius: int) -> tuple:
    coords = []
    for m in group.moduli:
        if m:
            coords.append(rng.randrange(m))
        else:
            coords.append(rng.randint(-radius, radius))
    return tuple(coords)


def _sample_set(
    rng: random.Random, group: GroupSpec, max_size: int, radius: int
) -> list[tuple]:
    size = rng.randint(1, max_size)
    seen: set[tuple] = set()
    while len(seen) < size:
        seen.add(group.reduce(_sample_coords(rng, group, radius)))
        if len(seen) >= _box_count(group, radius):
            break
    return sorted(seen)


def _box_count(group: GroupSpec, radius: int) -> int:
    total = 1
    for m in group.moduli:
        total *= m if m else 2 * radius + 1
    return total


def _sample_weights(rng: random.Random, count: int, denominator: int) -> list[int]:
    return [rng.randint(1, denominator) for _ in range(count)]


def _sample_dist_dict(
    rng: random.Random, group: GroupSpec, cfg: HarnessConfig
) -> dict:
    atoms = _sample_set(rng, group, cfg.max_support, cfg.box_radius)
    return {
        "group": group.to_json(),
        "atoms": [list(a) for a in atoms],
        "weights": _sample_weights(rng, len(atoms), cfg.denominator),
    }


def _sample_joint_dict(
    rng: random.Random, group: GroupSpec, cfg: HarnessConfig, max_atoms: int | None = None
) -> dict:
    cap = max_atoms if max_atoms is not None else cfg.max_support
    size = min(rng.randint(1, cap), _box_count(group, cfg.box_radius) ** 2)
    seen: set[tuple] = set()
    while len(seen) < size:
        x = group.reduce(_sample_coords(rng, group, cfg.box_radius))
        y = group.reduce(_sample_coords(rng, group, cfg.box_radius))
        seen.add((x, y))
    atoms = sorted(seen)
    return {
        "group": group.to_json(),
        "atoms": [[list(x), list(y)] for x, y in atoms],
        "weights": _sample_weights(rng, len(atoms), cfg.denominator),
    }


def _sample_graph_dict(rng: random.Random, cfg: HarnessConfig) -> dict:
    n_left = rng.randint(1, cfg.max_support)
    n_right = rng.randint(1, cfg.max_support)
    left = [f"a{i + 1}" for i in range(n_left)]
    right = [f"b{j + 1}" for j in range(n_right)]
    edges = {
        (a, b) for a in left for b in right if rng.random() < 0.5
    }
    for a in left:
        if not any(x == a for x, _ in edges):
            edges.add((a, rng.choice(right)))
    for b in right:
        if not any(y == b for _, y in edges):
            edges.add((rng.choice(left), b))
    return {
        "left": left,
        "right": right,
        "edges": sorted([a, b] for a, b in edges),
    }


def generate_instance(kind: str, seed: int, config: HarnessConfig | None = None) -> dict:
    """One reproducible random instance of the requested kind.

    Kinds: ``set``, ``dist``, ``joint`` (two group coordinates per atom),
    ``graph``. The returned dict is JSON-ready and exact (integer data).
    """
    cfg = config or HarnessConfig()
    rng = random.Random(seed)
    if kind == "set":
        group = _sample_group(rng, torsion_ok=True)
        return {
            "kind": "set",
            "group": group.to_json(),
            "elements": [list(c) for c in _sample_set(rng, group, cfg.max_set, cfg.box_radius)],
        }
    if kind == "dist":
        group = _sample_group(rng, torsion_ok=True)
        return {"kind": "dist", **_sample_dist_dict(rng, group, cfg)}
    if kind == "joint":
        group = _sample_group(rng, torsion_ok=True)
        return {"kind": "joint", **_sample_joint_dict(rng, group, cfg)}
    if kind == "graph":
        return {"kind": "graph", **_sample_graph_dict(rng, cfg)}
    raise ValueError(f"unknown instance kind {kind!r}")


def _dist_from_dict(obj: dict) -> Dist:
    group = GroupSpec.from_json(obj["group"])
    atoms = tuple(tuple(a) for a in obj["atoms"])
    total = sum(obj["weights"])
    probs = tuple(Fraction(w, total) for w in obj["weights"])
    return Dist(atoms, probs, group)


def _joint_from_dict(obj: dict) -> tuple[GroupSpec, JointDist]:
    group = GroupSpec.from_json(obj["group"])
    atoms = tuple((tuple(x), tuple(y)) for x, y in obj["atoms"])
    total = sum(obj["weights"])
    probs = tuple(Fraction(w, total) for w in obj["weights"])
    return group, JointDist(atoms, probs)


def _set_from_dict(group_obj: dict, elements: list) -> FiniteSet:
    return FiniteSet(GroupSpec.from_json(group_obj), tuple(tuple(e) for e in elements))


# ---------------------------------------------------------------------------
# Registry entries. Each generator takes (rng, cfg) and returns a dict; each
# evaluator takes (instance, cfg) and returns a TrialOutcome.
# ---------------------------------------------------------------------------


def _gen_sets(rng: random.Random, cfg: HarnessConfig, count: int, torsion_ok: bool) -> dict:
    group = _sample_group(rng, torsion_ok)
    return {
        "group": group.to_json(),
        "sets": [
            [list(c) for c in _sample_set(rng, group, cfg.max_set, cfg.box_radius)]
            for _ in range(count)
        ],
    }


def _gen_sets3_tf(rng, cfg):
    return _gen_sets(rng, cfg, 3, torsion_ok=False)


def _gen_sets3_any(rng, cfg):
    return _gen_sets(rng, cfg, 3, torsion_ok=True)


def _gen_sets2_any(rng, cfg):
    return _gen_sets(rng, cfg, 2, torsion_ok=True)


def _gen_sets4_any(rng, cfg):
    return _gen_sets(rng, cfg, 4, torsion_ok=True)


def _eval_ruzsa_triangle(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    a, b, c = (_set_from_dict(inst["group"], s) for s in inst["sets"])
    lhs = len(b) * len(sumset(a, c, "-"))
    rhs = len(sumset(a, b, "-")) * len(sumset(b, c, "-"))
    slack = float(rhs - lhs)
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _eval_ruzsa_sum(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    a, b, c = (_set_from_dict(inst["group"], s) for s in inst["sets"])
    lhs = len(a) * len(sumset(b, c, "+"))
    rhs = len(sumset(a, b, "+")) * len(sumset(a, c, "+"))
    slack = float(rhs - lhs)
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _gen_restricted(rng: random.Random, cfg: HarnessConfig) -> dict:
    group = _sample_group(rng, torsion_ok=False)
    a = _sample_set(rng, group, cfg.max_set, cfg.box_radius)
    b = _sample_set(rng, group, cfg.max_set, cfg.box_radius)
    pairs = [(x, y) for x in a for y in b if rng.random() < 0.6]
    if not pairs:
        pairs = [(rng.choice(a), rng.choice(b))]
    return {
        "group": group.to_json(),
        "A": [list(c) for c in a],
        "B": [list(c) for c in b],
        "pairs": [[list(x), list(y)] for x, y in pairs],
    }


def _eval_restricted(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    a = _set_from_dict(inst["group"], inst["A"])
    b = _set_from_dict(inst["group"], inst["B"])
    pairs = [(tuple(x), tuple(y)) for x, y in inst["pairs"]]
    plus = restricted_sumset(a, b, pairs, "+")
    minus = restricted_sumset(a, b, pairs, "-")
    slack = (
        (2.0 / 3.0) * math.log(len(a))
        + (2.0 / 3.0) * math.log(len(b))
        + 0.5 * math.log(len(plus))
        - math.log(len(minus))
    )
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _eval_sum_diff_sets(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    a, b = (_set_from_dict(inst["group"], s) for s in inst["sets"])
    lhs = len(sumset(a, b, "+")) * len(a) * len(b)
    rhs = len(sumset(a, b, "-")) ** 3
    slack = float(rhs - lhs)
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _eval_gen_ruzsa(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    a, b, c, d = (_set_from_dict(inst["group"], s) for s in inst["sets"])
    lhs = len(a) * len(b) * len(sumset(c, d, "+"))
    rhs = (
        len(sumset(a, b, "-"))
        * len(sumset(c, b, "-"))
        * len(sumset(a, d, "-"))
    )
    slack = float(rhs - lhs)
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _gen_joint2_any(rng, cfg):
    group = _sample_group(rng, torsion_ok=True)
    return _sample_joint_dict(rng, group, cfg)


def _gen_joint2_small(rng, cfg):
    group = _sample_group(rng, torsion_ok=True)
    return _sample_joint_dict(rng, group, cfg, max_atoms=min(3, cfg.max_support))


def _pair_entropies(group: GroupSpec, joint: JointDist) -> dict:
    return {
        "x": joint.entropy((0,)),
        "y": joint.entropy((1,)),
        "xy": joint.entropy(),
        "sum": joint.push_entropy(lambda a: group.add(a[0], a[1])),
        "diff": joint.push_entropy(lambda a: group.sub(a[0], a[1])),
    }


def _eval_kt_entropy(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    group, joint = _joint_from_dict(inst)
    h = _pair_entropies(group, joint)
    slack = (2.0 / 3.0) * h["x"] + (2.0 / 3.0) * h["y"] + 0.5 * h["sum"] - h["diff"]
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _eval_kt_mutual_info(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    group, joint = _joint_from_dict(inst)
    h = _pair_entropies(group, joint)
    h_x_sum = joint.push_entropy(lambda a: (a[0], group.add(a[0], a[1])))
    h_y_sum = joint.push_entropy(lambda a: (a[1], group.add(a[0], a[1])))
    h_x_diff = joint.push_entropy(lambda a: (a[0], group.sub(a[0], a[1])))
    h_y_diff = joint.push_entropy(lambda a: (a[1], group.sub(a[0], a[1])))
    i_x_sum = h["x"] + h["sum"] - h_x_sum
    i_y_sum = h["y"] + h["sum"] - h_y_sum
    i_x_diff = h["x"] + h["diff"] - h_x_diff
    i_y_diff = h["y"] + h["diff"] - h_y_diff
    i_xy = h["x"] + h["y"] - h["xy"]
    slack = (
        1.5 * i_x_sum + 1.5 * i_y_sum + 3.0 * i_xy - 0.5 * i_x_diff - 0.5 * i_y_diff
    )
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _gen_two_dists(rng, cfg):
    group = _sample_group(rng, torsion_ok=True)
    return {
        "px": _sample_dist_dict(rng, group, cfg),
        "py": _sample_dist_dict(rng, group, cfg),
    }


def _eval_kt_independent(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    px = _dist_from_dict(inst["px"])
    py = _dist_from_dict(inst["py"])
    group = px.group
    joint = JointDist.product(px, py)
    h = _pair_entropies(group, joint)
    slack = 3.0 * h["sum"] - h["x"] - h["y"] - h["diff"]
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _gen_mmt(rng, cfg):
    group = _sample_group(rng, torsion_ok=True)
    return {
        "pxz": _sample_joint_dict(rng, group, cfg),
        "py": _sample_dist_dict(rng, group, cfg),
    }


def _eval_mmt(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    group, pxz = _joint_from_dict(inst["pxz"])
    py = _dist_from_dict(inst["py"])
    # Triple (X, Z, Y) with Y independent of the pair.
    triple = JointDist.from_mapping(
        {
            (x, z, y): p * q
            for (x, z), p in zip(pxz.atoms, pxz.probs)
            for y, q in zip(py.atoms, py.probs)
        }
    )
    h_y = triple.entropy((2,))
    h_xz = triple.push_entropy(lambda a: group.sub(a[0], a[1]))
    h_xy = triple.push_entropy(lambda a: group.sub(a[0], a[2]))
    h_yz = triple.push_entropy(lambda a: group.sub(a[2], a[1]))
    slack = h_xy + h_yz - h_y - h_xz
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _gen_three_dists(rng, cfg):
    group = _sample_group(rng, torsion_ok=False)
    return {
        key: _sample_dist_dict(rng, group, cfg) for key in ("px", "py", "pz")
    }


def _gen_four_dists(rng, cfg):
    group = _sample_group(rng, torsion_ok=False)
    return {
        key: _sample_dist_dict(rng, group, cfg)
        for key in ("px", "py", "pu", "pv")
    }


def _max_entropy(px: Dist, py: Dist, form: LinearForm, cfg: HarnessConfig) -> float:
    return max_pushforward_entropy(px, py, form, tol=cfg.tol).value


def _eval_hr_triangle(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    px = _dist_from_dict(inst["px"])
    py = _dist_from_dict(inst["py"])
    pz = _dist_from_dict(inst["pz"])
    slack = (
        _max_entropy(px, py, DIFF, cfg)
        + _max_entropy(py, pz, DIFF, cfg)
        - py.entropy()
        - _max_entropy(px, pz, DIFF, cfg)
    )
    return TrialOutcome(slack, slack < -10.0 * cfg.tol)


def _eval_max_coupling_sum(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    px = _dist_from_dict(inst["px"])
    py = _dist_from_dict(inst["py"])
    pz = _dist_from_dict(inst["pz"])
    slack = (
        _max_entropy(px, py, SUM, cfg)
        + _max_entropy(px, pz, SUM, cfg)
        - px.entropy()
        - _max_entropy(py, pz, SUM, cfg)
    )
    return TrialOutcome(slack, slack < -10.0 * cfg.tol)


def _eval_cor8(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    px = _dist_from_dict(inst["px"])
    py = _dist_from_dict(inst["py"])
    pu = _dist_from_dict(inst["pu"])
    pv = _dist_from_dict(inst["pv"])
    slack = (
        _max_entropy(px, py, DIFF, cfg)
        + _max_entropy(px, pu, DIFF, cfg)
        + _max_entropy(pv, py, DIFF, cfg)
        - px.entropy()
        - py.entropy()
        - _max_entropy(pu, pv, SUM, cfg)
    )
    return TrialOutcome(slack, slack < -10.0 * cfg.tol)


def _gen_two_dists_tf(rng, cfg):
    group = _sample_group(rng, torsion_ok=False)
    return {
        "px": _sample_dist_dict(rng, group, cfg),
        "py": _sample_dist_dict(rng, group, cfg),
    }


def _eval_remark_sum_diff(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    px = _dist_from_dict(inst["px"])
    py = _dist_from_dict(inst["py"])
    slack = (
        3.0 * _max_entropy(px, py, DIFF, cfg)
        - px.entropy()
        - py.entropy()
        - _max_entropy(px, py, SUM, cfg)
    )
    return TrialOutcome(slack, slack < -10.0 * cfg.tol)


def _gen_prop1(rng, cfg):
    group = _sample_group(rng, torsion_ok=True)
    return {
        "pxy": _sample_joint_dict(rng, group, cfg),
        "p33": _sample_joint_dict(rng, group, cfg),
    }


def _eval_prop1(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    group, pxy = _joint_from_dict(inst["pxy"])
    _, p33 = _joint_from_dict(inst["p33"])
    coupling = build_sum_diff_coupling(group, pxy, p33)
    slack = sum_diff_slack(group, coupling)
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _gen_cor6(rng, cfg):
    group = _sample_group(rng, torsion_ok=True)
    return {
        "px": _sample_dist_dict(rng, group, cfg),
        "py": _sample_dist_dict(rng, group, cfg),
        "p33": _sample_joint_dict(rng, group, cfg),
    }


def _eval_cor6(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    px = _dist_from_dict(inst["px"])
    py = _dist_from_dict(inst["py"])
    group = px.group
    _, p33 = _joint_from_dict(inst["p33"])
    pxy = JointDist.product(px, py)
    coupling = build_sum_diff_coupling(group, pxy, p33)
    slack = independent_sum_diff_slack(group, coupling)
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _gen_chain(rng: random.Random, cfg: HarnessConfig) -> dict:
    """A consistent function-linked chain, built marginal by marginal.

    Each next marginal is assembled fiber by fiber over the previous
    linking law, so the two pushforwards agree exactly by construction.
    """
    length = rng.randint(2, cfg.max_chain_len)
    size0 = rng.randint(1, cfg.max_support)
    spaces = [size0]
    weights0 = [rng.randint(1, cfg.denominator) for _ in range(size0)]
    f_maps: list[list[int]] = []
    g_maps: list[list[int]] = []
    cond_weights: list[list[int]] = []
    for _ in range(length - 1):
        prev = spaces[-1]
        n_labels = rng.randint(1, prev)
        f_map = [rng.randrange(n_labels) for _ in range(prev)]
        used = set(f_map)
        g_map = []
        for u in range(n_labels):
            if u in used:
                g_map.extend([u] * rng.randint(1, 2))
        f_maps.append(f_map)
        g_maps.append(g_map)
        cond_weights.append(
            [rng.randint(1, cfg.denominator) for _ in range(len(g_map))]
        )
        spaces.append(len(g_map))
    return {
        "spaces": spaces,
        "weights0": weights0,
        "f_maps": f_maps,
        "g_maps": g_maps,
        "cond_weights": cond_weights,
    }


def _chain_from_dict(inst: dict) -> ChainSpec:
    total0 = sum(inst["weights0"])
    marginals = [
        Dist(
            tuple(range(inst["spaces"][0])),
            tuple(Fraction(w, total0) for w in inst["weights0"]),
        )
    ]
    links: list[tuple[Callable, Callable]] = []
    for f_map, g_map, cond in zip(
        inst["f_maps"], inst["g_maps"], inst["cond_weights"]
    ):
        prev = marginals[-1]
        u_law: dict[int, Fraction] = {}
        for atom, p in zip(prev.atoms, prev.probs):
            u = f_map[atom]
            u_law[u] = u_law.get(u, Fraction(0)) + p
        fiber_totals: dict[int, int] = {}
        for x, u in enumerate(g_map):
            fiber_totals[u] = fiber_totals.get(u, 0) + cond[x]
        atoms, probs = [], []
        for x, u in enumerate(g_map):
            mass = u_law.get(u, Fraction(0)) * Fraction(cond[x], fiber_totals[u])
            if mass > 0:
                atoms.append(x)
                probs.append(mass)
        marginals.append(Dist(tuple(atoms), tuple(probs)))
        links.append(
            (
                lambda x, fm=tuple(f_map): fm[x],
                lambda x, gm=tuple(g_map): gm[x],
            )
        )
    return ChainSpec(tuple(marginals), tuple(links))


def _eval_copy_identity(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    spec = _chain_from_dict(inst)
    residual = verify_copy_identity(spec)
    return TrialOutcome(-residual, residual > IDENTITY_TOL)


def _gen_lemma2(rng: random.Random, cfg: HarnessConfig) -> dict:
    base = rng.randint(2, cfg.max_support)
    n = rng.randint(2, cfg.max_chain_len)
    maps = [
        [rng.randrange(rng.randint(1, base)) for _ in range(base)]
        for _ in range(n - 1)
    ]
    return {"base": base, "n": n, "maps": maps}


def _eval_lemma2(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    base, n, maps = inst["base"], inst["n"], inst["maps"]
    stack = [(x,) for x in range(base)]
    for f in maps:
        stack = [
            tup + (x,) for tup in stack for x in range(base) if f[tup[-1]] == f[x]
        ]
    count = len(stack)
    image_prod = 1
    for f in maps:
        image_prod *= len(set(f))
    slack = float(count * image_prod - base**n)
    return TrialOutcome(slack, slack < BASE_THRESHOLD)


def _eval_four_copy(inst: dict, cfg: HarnessConfig) -> TrialOutcome:
    group, pxy = _joint_from_dict(inst)
    chain = build_four_copy_chain(group, pxy)
    slack = min(-chain.five_term, IDENTITY_TOL - chain.equality_residual)
    violated = (
        chain.equality_residual > IDENTITY_TOL
        or chain.five_term > -BASE_THRESHOLD
    )
    return TrialOutcome(slack, violated)


@dataclass(frozen=True)
class RegistryEntry:
    id: str
    description: str
    solver_dependent: bool
    generate: Callable[[random.Random, HarnessConfig], dict]
    evaluate: Callable[[dict, HarnessConfig], TrialOutcome]


REGISTRY: dict[str, RegistryEntry] = {
    entry.id: entry
    for entry in [
        RegistryEntry(
            "ruzsa-triangle-sets",
            "set triangle bound |B||A-C| <= |A-B||B-C|",
            False,
            _gen_sets3_tf,
            _eval_ruzsa_triangle,
        ),
        RegistryEntry(
            "ruzsa-sum-sets",
            "sum-side bound |A||B+C| <= |A+B||A+C|",
            False,
            _gen_sets3_tf,
            _eval_ruzsa_sum,
        ),
        RegistryEntry(
            "katz-tao-restricted",
            "restricted difference bound against the restricted sum",
            False,
            _gen_restricted,
            _eval_restricted,
        ),
        RegistryEntry(
            "sum-diff-sets",
            "sumset versus cubed difference set |A+B||A||B| <= |A-B|^3",
            False,
            _gen_sets2_any,
            _eval_sum_diff_sets,
        ),
        RegistryEntry(
            "gen-ruzsa-sum-diff-sets",
            "four-set bound |A||B||C+D| <= |A-B||C-B||A-D|",
            False,
            _gen_sets4_any,
            _eval_gen_ruzsa,
        ),
        RegistryEntry(
            "kt-entropy",
            "difference entropy bound (2/3)H(X)+(2/3)H(Y)+(1/2)H(X+Y)",
            False,
            _gen_joint2_any,
            _eval_kt_entropy,
        ),
        RegistryEntry(
            "kt-mutual-info",
            "mutual-information form of the sum-difference bound",
            False,
            _gen_joint2_any,
            _eval_kt_mutual_info,
        ),
        RegistryEntry(
            "kt-independent",
            "independent-pair bound H(X-Y) <= 3H(X+Y)-H(X)-H(Y)",
            False,
            _gen_two_dists,
            _eval_kt_independent,
        ),
        RegistryEntry(
            "mmt-independent",
            "H(Y)+H(X-Z) <= H(X-Y)+H(Y-Z) when Y is independent",
            False,
            _gen_mmt,
            _eval_mmt,
        ),
        RegistryEntry(
            "hr-triangle",
            "triangle bound for the coupling-maximized difference entropy",
            True,
            _gen_three_dists,
            _eval_hr_triangle,
        ),
        RegistryEntry(
            "max-coupling-sum",
            "triangle-style bound for coupling-maximized sum entropies",
            True,
            _gen_three_dists,
            _eval_max_coupling_sum,
        ),
        RegistryEntry(
            "prop1-sum-diff",
            "six-variable agreement-coupling inequality",
            False,
            _gen_prop1,
            _eval_prop1,
        ),
        RegistryEntry(
            "cor6-sum-diff",
            "marginal-only agreement-coupling inequality, independent pair",
            False,
            _gen_cor6,
            _eval_cor6,
        ),
        RegistryEntry(
            "cor8-four-marginal",
            "four-marginal bound mixing max-sum and max-difference entropies",
            True,
            _gen_four_dists,
            _eval_cor8,
        ),
        RegistryEntry(
            "remark-sum-diff-entropic",
            "H(X)+H(Y)+maxH(X+Y) <= 3 maxH(X-Y) over couplings",
            True,
            _gen_two_dists_tf,
            _eval_remark_sum_diff,
        ),
        RegistryEntry(
            "copy-identity",
            "exact chain identity H(X^n)+sum H(U) = sum H(X)",
            False,
            _gen_chain,
            _eval_copy_identity,
        ),
        RegistryEntry(
            "lemma2-count",
            "agreement-tuple count bound |C| prod|B_i| >= |A|^n",
            False,
            _gen_lemma2,
            _eval_lemma2,
        ),
        RegistryEntry(
            "appendix-a-chain",
            "four-copy chain equality plus the five-term pair bound",
            False,
            _gen_joint2_small,
            _eval_four_copy,
        ),
    ]
}


def registry_ids() -> list[str]:
    return list(REGISTRY)


def _run_range(
    id: str, seed: int, cfg: HarnessConfig, start: int, stop: int
) -> tuple[float, int, dict, int]:
    entry = REGISTRY[id]
    worst = (math.inf, -1, {})
    violations = 0
    for trial in range(start, stop):
        rng = _trial_rng(seed, trial)
        inst = entry.generate(rng, cfg)
        outcome = entry.evaluate(inst, cfg)
        if outcome.violated:
            violations += 1
        if (outcome.slack, trial) < worst[:2]:
            worst = (outcome.slack, trial, inst)
    return worst[0], worst[1], worst[2], violations


def run_suite(
    id: str,
    trials: int,
    seed: int,
    config: HarnessConfig | None = None,
    jobs: int = 1,
) -> SuiteReport:
    """Run one registered check on ``trials`` seeded instances.

    The per-trial stream depends only on (seed, trial index), so results
    are identical for any ``jobs`` split.
    """
    if id not in REGISTRY:
        raise KeyError(f"unknown check id {id!r}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    cfg = config or HarnessConfig()
    if jobs <= 1:
        slack, worst_trial, worst_inst, violations = _run_range(
            id, seed, cfg, 0, trials
        )
    else:
        chunk = max(1, math.ceil(trials / jobs))
        spans = [
            (start, min(start + chunk, trials))
            for start in range(0, trials, chunk)
        ]
        results = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_range, id, seed, cfg, start, stop)
                for start, stop in spans
            ]
            results = [f.result() for f in futures]
        slack, worst_trial, worst_inst = math.inf, -1, {}
        violations = 0
        for s, t, inst, v in results:
            violations += v
            if (s, t) < (slack, worst_trial):
                slack, worst_trial, worst_inst = s, t, inst
    return SuiteReport(
        id=id,
        trials=trials,
        seed=seed,
        min_slack=slack,
        worst_instance={"trial": worst_trial, "instance": worst_inst},
        violations=violations,
        config=cfg,
    )


# ---------------------------------------------------------------------------
# Ordering witnesses: the coupling-maximized distance is not comparable to
# the support-based distance; exhibit one instance on each side.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessReport:
    below: dict | None
    above: dict | None
    trials_used: int
    partial: bool

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "below": self.below,
            "above": self.above,
            "trials_used": self.trials_used,
            "partial": self.partial,
        }


def ordering_witnesses(
    budget: int = 2000,
    seed: int = 0,
    tol: float = 1e-8,
    margin: float = 1e-3,
    oracle_resolution: float = 1e-3,
) -> WitnessReport:
    """Search for instances ordering the two distances both ways.

    ``below``: uniform laws on sets A, B whose coupling-maximized distance
    is certifiably under the support distance by ``margin`` (solver upper
    bound, re-verified by the grid search). ``above``: the induced
    marginals of a joint law that is uniform on one representative pair
    per difference, pushing the coupling-maximized distance above the
    support distance by ``margin`` (achieved value, grid re-verified).
    """
    group = GroupSpec.integers(1)
    rng = random.Random(seed)
    below = above = None
    trials = 0
    while trials < budget and (below is None or above is None):
        trials += 1
        # Supports of three elements keep the grid oracle's free dimension
        # within its exhaustive range, so every candidate can be re-checked.
        a = _sample_set(rng, group, 3, 4)
        b = _sample_set(rng, group, 3, 4)
        set_a = FiniteSet(group, tuple(a))
        set_b = FiniteSet(group, tuple(b))
        if below is None and len(set_a) > 1 and len(set_b) > 1:
            px = Dist.uniform(set_a.elements, group)
            py = Dist.uniform(set_b.elements, group)
            d_sets = ruzsa_distance(set_a, set_b)
            res = max_pushforward_entropy(px, py, DIFF, tol=tol)
            upper = (
                res.value + res.duality_gap
                - 0.5 * px.entropy()
                - 0.5 * py.entropy()
            )
            if upper < d_sets - margin:
                oracle = (
                    grid_oracle(px, py, DIFF, oracle_resolution)
                    - 0.5 * px.entropy()
                    - 0.5 * py.entropy()
                )
                if oracle < d_sets - margin:
                    below = {
                        "A": [list(c) for c in set_a],
                        "B": [list(c) for c in set_b],
                        "d_entropic_upper": upper,
                        "d_entropic_oracle": oracle,
                        "d_sets": d_sets,
                        "trial": trials,
                    }
        if above is None:
            reps: dict[tuple, tuple] = {}
            for x in set_a:
                for y in set_b:
                    reps.setdefault(group.sub(x, y), (x, y))
            pairs = sorted(reps.values())
            px_m: dict[tuple, int] = {}
            py_m: dict[tuple, int] = {}
            for x, y in pairs:
                px_m[x] = px_m.get(x, 0) + 1
                py_m[y] = py_m.get(y, 0) + 1
            px = Dist.from_weights(px_m, group)
            py = Dist.from_weights(py_m, group)
            sup_a = FiniteSet(group, tuple(px.atoms))
            sup_b = FiniteSet(group, tuple(py.atoms))
            d_sets = ruzsa_distance(sup_a, sup_b)
            res = max_pushforward_entropy(px, py, DIFF, tol=tol)
            achieved = (
                res.value - 0.5 * px.entropy() - 0.5 * py.entropy()
            )
            if achieved > d_sets + margin:
                oracle = (
                    grid_oracle(px, py, DIFF, oracle_resolution)
                    - 0.5 * px.entropy()
                    - 0.5 * py.entropy()
                )
                if oracle > d_sets + margin:
                    above = {
                        "A": [list(c) for c in sup_a],
                        "B": [list(c) for c in sup_b],
                        "px": px.to_json(),
                        "py": py.to_json(),
                        "d_entropic_achieved": achieved,
                        "d_entropic_oracle": oracle,
                        "d_sets": d_sets,
                        "trial": trials,
                    }
    return WitnessReport(
        below=below,
        above=above,
        trials_used=trials,
        partial=below is None or above is None,
    )
