"""Couplings built along Markov chains that agree through functions.

A chain specification gives marginals P(X_1), ..., P(X_n) and link pairs
(f_i, g_i) with f_i(X_i) and g_i(X_{i+1}) equal in law; the induced joint
draws X_1 from its marginal and each X_{i+1} from its marginal conditioned
on g_i(X_{i+1}) matching U_i = f_i(X_i). Two exact entropy identities hold
along any such chain:

    H(X_1..X_n) + sum_i H(U_i) = sum_i H(X_i)
    H(all) + sum_i I(X_i;U_i) + sum_i I(U_i;X_{i+1})
        = sum_i H(X_i) + sum_i H(U_i)

(the second holds for arbitrary Markov chains X_1 - U_1 - X_2 - ...; the
functional case specializes it). Probabilities may be floats or exact
Fractions; arithmetic preserves the input type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

from .dist import Dist, shannon_entropy
from .groups import GroupSpec

__all__ = [
    "JointDist",
    "ChainSpec",
    "chain_joint",
    "markov_chain_joint",
    "chain_rule_residual",
    "verify_copy_identity",
    "verify_chain_rule_identity",
    "build_sum_diff_coupling",
    "sum_diff_slack",
    "independent_sum_diff_slack",
    "FourCopyChain",
    "build_four_copy_chain",
]

#: Default cap on the support size of constructed joints.
MAX_SUPPORT = 1_000_000

#: Tolerance for agreement between linked pushforwards.
LINK_TOL = 1e-12


@dataclass(frozen=True)
class JointDist:
    """A sparse joint distribution over tuples of labels."""

    atoms: tuple[tuple, ...]
    probs: tuple

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.probs):
            raise ValueError("atoms and probs must align")
        if not self.atoms:
            raise ValueError("joint distribution has empty support")
        arity = len(self.atoms[0])
        if any(len(a) != arity for a in self.atoms):
            raise ValueError("all atoms must have the same arity")
        total = math.fsum(float(p) for p in self.probs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"joint masses sum to {total!r}")
        pairs = [
            (a, p) for a, p in zip(self.atoms, self.probs) if float(p) > 0.0
        ]
        try:
            pairs.sort(key=lambda kv: kv[0])
        except TypeError:
            pass
        object.__setattr__(self, "atoms", tuple(a for a, _ in pairs))
        object.__setattr__(self, "probs", tuple(p for _, p in pairs))

    @classmethod
    def from_mapping(cls, mapping: Mapping[tuple, object]) -> "JointDist":
        return cls(tuple(mapping), tuple(mapping.values()))

    @classmethod
    def product(cls, *dists: Dist) -> "JointDist":
        """Independent product of single-variable distributions."""
        acc: dict[tuple, object] = {(): 1}
        for d in dists:
            nxt: dict[tuple, object] = {}
            for atom, p in acc.items():
                for a, q in zip(d.atoms, d.probs):
                    nxt[atom + (a,)] = p * q
            acc = nxt
        return cls.from_mapping(acc)

    @property
    def arity(self) -> int:
        return len(self.atoms[0])

    def __len__(self) -> int:
        return len(self.atoms)

    def push(self, fn: Callable[[tuple], Hashable]) -> dict:
        out: dict = {}
        for a, p in zip(self.atoms, self.probs):
            k = fn(a)
            out[k] = out.get(k, 0) + p
        return out

    def marginal(self, indices: Sequence[int]) -> "JointDist":
        idx = tuple(indices)
        return JointDist.from_mapping(
            self.push(lambda a: tuple(a[i] for i in idx))
        )

    def component(self, index: int) -> Dist:
        masses = self.push(lambda a: a[index])
        return Dist(tuple(masses), tuple(masses.values()))

    def entropy(self, indices: Sequence[int] | None = None) -> float:
        """Entropy in nats of the selected variables (all by default)."""
        if indices is None:
            return shannon_entropy(self.probs)
        idx = tuple(indices)
        return shannon_entropy(
            self.push(lambda a: tuple(a[i] for i in idx)).values()
        )

    def push_entropy(self, fn: Callable[[tuple], Hashable]) -> float:
        return shannon_entropy(self.push(fn).values())

    def mutual_information(
        self, first: Sequence[int], second: Sequence[int]
    ) -> float:
        """I(first; second) in nats between two variable blocks."""
        return (
            self.entropy(first)
            + self.entropy(second)
            - self.entropy(tuple(first) + tuple(second))
        )


@dataclass(frozen=True)
class ChainSpec:
    """Marginals plus function links defining an agreement chain.

    ``links[i] = (f, g)`` requires the law of f(X_i) under marginal i to
    equal the law of g(X_{i+1}) under marginal i+1.
    """

    marginals: tuple[Dist, ...]
    links: tuple[tuple[Callable, Callable], ...]

    def __post_init__(self) -> None:
        marginals = tuple(self.marginals)
        links = tuple((f, g) for f, g in self.links)
        if len(marginals) < 2:
            raise ValueError("a chain needs at least two marginals")
        if len(links) != len(marginals) - 1:
            raise ValueError(
                f"{len(marginals)} marginals need {len(marginals) - 1} links, "
                f"got {len(links)}"
            )
        for i, (f, g) in enumerate(links):
            left = marginals[i].push(f).to_mapping()
            right = marginals[i + 1].push(g).to_mapping()
            keys = set(left) | set(right)
            worst = max(
                abs(float(left.get(k, 0)) - float(right.get(k, 0))) for k in keys
            )
            if worst > LINK_TOL:
                raise ValueError(
                    f"link {i} is inconsistent: pushforwards differ by {worst:.3e}"
                )
        object.__setattr__(self, "marginals", marginals)
        object.__setattr__(self, "links", links)

    @property
    def length(self) -> int:
        return len(self.marginals)

    def link_dist(self, i: int) -> Dist:
        """Law of the i-th linking value U_i."""
        f, _ = self.links[i]
        return self.marginals[i].push(f)


def chain_joint(spec: ChainSpec, max_support: int = MAX_SUPPORT) -> JointDist:
    """The joint law of (X_1, ..., X_n) along the chain.

    P(x_1..x_n) = P(x_1) * prod_i P(x_{i+1}) [g_i(x_{i+1}) = u_i] / P(u_i)
    with u_i = f_i(x_i). Marginals of the result reproduce the inputs.
    """
    first = spec.marginals[0]
    current: dict[tuple, object] = {
        (a,): p for a, p in zip(first.atoms, first.probs)
    }
    for i, (f, g) in enumerate(spec.links):
        nxt_marg = spec.marginals[i + 1]
        fibers: dict = {}
        masses: dict = {}
        for a, p in zip(nxt_marg.atoms, nxt_marg.probs):
            u = g(a)
            fibers.setdefault(u, []).append((a, p))
            masses[u] = masses.get(u, 0) + p
        grown: dict[tuple, object] = {}
        for atom, p in current.items():
            u = f(atom[-1])
            if u not in fibers:
                raise ValueError(
                    f"link {i}: value {u!r} reached by f has no fiber under g"
                )
            for a, q in fibers[u]:
                grown[atom + (a,)] = p * q / masses[u]
        if len(grown) > max_support:
            raise ValueError(
                f"chain support exceeded {max_support} atoms at link {i}"
            )
        current = grown
    return JointDist.from_mapping(current)


def markov_chain_joint(
    first: Dist,
    kernels: Sequence[Mapping[Hashable, Dist]],
    max_support: int = MAX_SUPPORT,
) -> JointDist:
    """Joint law of (Z_1, ..., Z_k) for an arbitrary Markov chain.

    ``kernels[i]`` maps each atom of variable i to the conditional law of
    variable i+1. Useful for exercising the chain-rule identity beyond
    function-induced links.
    """
    current: dict[tuple, object] = {
        (a,): p for a, p in zip(first.atoms, first.probs)
    }
    for kernel in kernels:
        grown: dict[tuple, object] = {}
        for atom, p in current.items():
            cond = kernel[atom[-1]]
            for a, q in zip(cond.atoms, cond.probs):
                key = atom + (a,)
                grown[key] = grown.get(key, 0) + p * q
        if len(grown) > max_support:
            raise ValueError(f"chain support exceeded {max_support} atoms")
        current = grown
    return JointDist.from_mapping(current)


def chain_rule_residual(
    joint: JointDist, x_indices: Sequence[int], u_indices: Sequence[int]
) -> float:
    """Residual of the alternating-chain entropy identity.

    For variables ordered X_1, U_1, X_2, ..., U_{n-1}, X_n (positions given
    by the two index sequences), returns

        |H(all) + sum I(X_i;U_i) + sum I(U_i;X_{i+1})
            - sum H(X_i) - sum H(U_i)|
    """
    xs, us = list(x_indices), list(u_indices)
    if len(xs) != len(us) + 1:
        raise ValueError("need one more X variable than U variables")
    lhs = joint.entropy(xs + us)
    rhs = 0.0
    for i, u in enumerate(us):
        lhs += joint.mutual_information((xs[i],), (u,))
        lhs += joint.mutual_information((u,), (xs[i + 1],))
    for x in xs:
        rhs += joint.entropy((x,))
    for u in us:
        rhs += joint.entropy((u,))
    return abs(lhs - rhs)


def verify_copy_identity(spec: ChainSpec, max_support: int = MAX_SUPPORT) -> float:
    """Residual of H(X_1..X_n) + sum H(U_i) = sum H(X_i) along the chain."""
    joint = chain_joint(spec, max_support=max_support)
    lhs = joint.entropy()
    for i in range(spec.length - 1):
        f, _ = spec.links[i]
        lhs += joint.push_entropy(lambda a, f=f, i=i: f(a[i]))
    rhs = sum(joint.entropy((i,)) for i in range(spec.length))
    return abs(lhs - rhs)


def verify_chain_rule_identity(
    spec: ChainSpec, max_support: int = MAX_SUPPORT
) -> float:
    """Residual of the longer identity with the mutual-information terms,
    evaluated on the chain joint augmented with the U_i columns."""
    joint = chain_joint(spec, max_support=max_support)
    n = spec.length
    fs = [f for f, _ in spec.links]

    def augment(atom: tuple) -> tuple:
        return atom + tuple(fs[i](atom[i]) for i in range(n - 1))

    augmented = JointDist.from_mapping(joint.push(augment))
    return chain_rule_residual(
        augmented, x_indices=range(n), u_indices=range(n, 2 * n - 1)
    )


def _as_pair_joint(p: JointDist) -> JointDist:
    if p.arity != 2:
        raise ValueError(f"need a two-variable joint, got arity {p.arity}")
    return p


def build_sum_diff_coupling(
    group: GroupSpec,
    p_xy: JointDist,
    p_x3y3: JointDist,
    max_support: int = MAX_SUPPORT,
) -> JointDist:
    """Six-variable coupling (X1,Y1,X2,Y2,X3,Y3) where (X1,Y1) and
    (X2,Y2) are copies of ``p_xy`` agreeing on their difference and
    (X3,Y3) ~ ``p_x3y3`` is independent of both.

    Along it, H(X1,Y1) + H(X2,Y2) + H(X3+Y3) is at most
    H(X1-Y1) + H(X1, Y2, X2-Y3, X3-Y1).
    """
    _as_pair_joint(p_xy)
    _as_pair_joint(p_x3y3)
    diff_fibers: dict = {}
    diff_mass: dict = {}
    for (x, y), p in zip(p_xy.atoms, p_xy.probs):
        u = group.sub(x, y)
        diff_fibers.setdefault(u, []).append(((x, y), p))
        diff_mass[u] = diff_mass.get(u, 0) + p
    out: dict[tuple, object] = {}
    for (x1, y1), p1 in zip(p_xy.atoms, p_xy.probs):
        u = group.sub(x1, y1)
        for (x2, y2), p2 in diff_fibers[u]:
            w = p1 * p2 / diff_mass[u]
            for (x3, y3), p3 in zip(p_x3y3.atoms, p_x3y3.probs):
                out[(x1, y1, x2, y2, x3, y3)] = w * p3
                if len(out) > max_support:
                    raise ValueError(f"coupling support exceeded {max_support}")
    return JointDist.from_mapping(out)


def sum_diff_slack(group: GroupSpec, coupling: JointDist) -> float:
    """Right minus left of the six-variable sum-difference inequality."""
    if coupling.arity != 6:
        raise ValueError(f"need a six-variable coupling, got {coupling.arity}")
    lhs = (
        coupling.entropy((0, 1))
        + coupling.entropy((2, 3))
        + coupling.push_entropy(lambda a: group.add(a[4], a[5]))
    )
    rhs = coupling.push_entropy(
        lambda a: group.sub(a[0], a[1])
    ) + coupling.push_entropy(
        lambda a: (
            a[0],
            a[3],
            group.sub(a[2], a[5]),
            group.sub(a[4], a[1]),
        )
    )
    return rhs - lhs


def independent_sum_diff_slack(group: GroupSpec, coupling: JointDist) -> float:
    """Right minus left of the marginal-only variant that additionally
    assumes X and Y independent in the base pair."""
    if coupling.arity != 6:
        raise ValueError(f"need a six-variable coupling, got {coupling.arity}")
    lhs = (
        coupling.entropy((2,))
        + coupling.entropy((1,))
        + coupling.push_entropy(lambda a: group.add(a[4], a[5]))
    )
    rhs = (
        coupling.push_entropy(lambda a: group.sub(a[0], a[1]))
        + coupling.push_entropy(lambda a: group.sub(a[4], a[1]))
        + coupling.push_entropy(lambda a: group.sub(a[2], a[5]))
    )
    return rhs - lhs


@dataclass(frozen=True)
class FourCopyChain:
    """Four linked copies of a triple (X, Y, Y') with diagnostics.

    ``equality_residual`` checks the exact entropy identity satisfied by
    the twelve variables; ``five_term`` is the (nonpositive) combination
    5 H(X,Y) - 4 H(X) - 4 H(Y) - 3 H(X+Y) + H(X-Y) of the base pair.
    """

    joint: JointDist
    triple: JointDist
    equality_residual: float
    five_term: float


def build_four_copy_chain(
    group: GroupSpec,
    p_xy: JointDist,
    max_support: int = MAX_SUPPORT,
) -> FourCopyChain:
    """Chain four copies of the conditionally independent triple
    (X, Y, Y') with (X, Y') a fresh copy of (X, Y) given X.

    Copies agree successively through (X+Y, X+Y'), then (Y, Y'), then
    (X+Y, Y'). The twelve-variable entropy satisfies, exactly,

        H(all) = 4 H(X,Y,Y') - H(X+Y, X+Y') - H(Y, Y') - H(X+Y, Y')
    """
    _as_pair_joint(p_xy)
    x_mass: dict = {}
    for (x, _y), p in zip(p_xy.atoms, p_xy.probs):
        x_mass[x] = x_mass.get(x, 0) + p
    triple_map: dict[tuple, object] = {}
    for (x, y), p in zip(p_xy.atoms, p_xy.probs):
        for (x2, y2), p2 in zip(p_xy.atoms, p_xy.probs):
            if x2 == x:
                triple_map[(x, y, y2)] = (
                    triple_map.get((x, y, y2), 0) + p * p2 / x_mass[x]
                )
    triple = JointDist.from_mapping(triple_map)
    triple_dist = Dist(triple.atoms, triple.probs)

    def f1(t: tuple):
        x, y, yd = t
        return (group.add(x, y), group.add(x, yd))

    def f2(t: tuple):
        return (t[1], t[2])

    def f3(t: tuple):
        x, y, yd = t
        return (group.add(x, y), yd)

    spec = ChainSpec(
        marginals=(triple_dist,) * 4,
        links=((f1, f1), (f2, f2), (f3, f3)),
    )
    joint = chain_joint(spec, max_support=max_support)
    h_all = joint.entropy()
    h_triple = triple.entropy()
    predicted = (
        4.0 * h_triple
        - shannon_entropy(triple.push(f1).values())
        - shannon_entropy(triple.push(f2).values())
        - shannon_entropy(triple.push(f3).values())
    )
    h_x = triple.entropy((0,))
    h_y = triple.entropy((1,))
    h_xy = triple.entropy((0, 1))
    h_sum = triple.push_entropy(lambda t: group.add(t[0], t[1]))
    h_diff = triple.push_entropy(lambda t: group.sub(t[0], t[1]))
    five_term = 5.0 * h_xy - 4.0 * h_x - 4.0 * h_y - 3.0 * h_sum + h_diff
    return FourCopyChain(
        joint=joint,
        triple=triple,
        equality_residual=abs(h_all - predicted),
        five_term=five_term,
    )
