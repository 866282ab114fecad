"""Exact arithmetic over finitely generated abelian groups of the form
``Z^d`` or ``(Z_m)^d``, together with the finite-set operations built on
them: sumsets, images under integer linear forms, restricted sumsets,
Ruzsa distance, and base-q flattening of product groups down to ``Z^d``.

All coordinates are Python integers, so every set operation is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Coords = tuple[int, ...]

__all__ = [
    "GroupSpec",
    "Element",
    "FiniteSet",
    "LinearForm",
    "sumset",
    "linear_image",
    "restricted_sumset",
    "ruzsa_distance",
    "choose_q",
    "flatten",
]


@dataclass(frozen=True)
class GroupSpec:
    """A finitely generated abelian group given coordinate-wise.

    ``moduli[i] == 0`` means the i-th coordinate ranges over the integers;
    ``moduli[i] == m > 0`` means it ranges over ``Z_m``.
    """

    dimension: int
    moduli: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        moduli = tuple(int(m) for m in self.moduli)
        if len(moduli) != self.dimension:
            raise ValueError(
                f"expected {self.dimension} moduli, got {len(moduli)}"
            )
        if any(m < 0 for m in moduli):
            raise ValueError(f"moduli must be >= 0, got {moduli}")
        object.__setattr__(self, "moduli", moduli)

    @classmethod
    def integers(cls, dimension: int = 1) -> "GroupSpec":
        """The torsion-free group Z^dimension."""
        return cls(dimension, (0,) * dimension)

    @classmethod
    def cyclic(cls, modulus: int, dimension: int = 1) -> "GroupSpec":
        """The group (Z_modulus)^dimension."""
        if modulus < 2:
            raise ValueError(f"cyclic modulus must be >= 2, got {modulus}")
        return cls(dimension, (modulus,) * dimension)

    @property
    def is_torsion_free(self) -> bool:
        return all(m == 0 for m in self.moduli)

    @property
    def zero(self) -> Coords:
        return (0,) * self.dimension

    def reduce(self, coords: Sequence[int]) -> Coords:
        """Canonical representative: coordinate i reduced mod moduli[i]."""
        if len(coords) != self.dimension:
            raise ValueError(
                f"expected {self.dimension} coordinates, got {len(coords)}"
            )
        return tuple(
            int(c) % m if m else int(c) for c, m in zip(coords, self.moduli)
        )

    def add(self, a: Sequence[int], b: Sequence[int]) -> Coords:
        return self.reduce(tuple(x + y for x, y in zip(a, b)))

    def sub(self, a: Sequence[int], b: Sequence[int]) -> Coords:
        return self.reduce(tuple(x - y for x, y in zip(a, b)))

    def neg(self, a: Sequence[int]) -> Coords:
        return self.reduce(tuple(-x for x in a))

    def scale(self, k: int, a: Sequence[int]) -> Coords:
        return self.reduce(tuple(k * x for x in a))

    def to_json(self) -> dict:
        return {"dim": self.dimension, "moduli": list(self.moduli)}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupSpec":
        return cls(int(obj["dim"]), tuple(obj["moduli"]))


def _require_same_group(a: "GroupSpec", b: "GroupSpec", what: str) -> None:
    if a != b:
        raise ValueError(f"{what} live on different groups: {a} vs {b}")


@dataclass(frozen=True)
class Element:
    """A single group element with canonically reduced coordinates."""

    group: GroupSpec
    coords: Coords

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", self.group.reduce(self.coords))

    def __add__(self, other: "Element") -> "Element":
        _require_same_group(self.group, other.group, "elements")
        return Element(self.group, self.group.add(self.coords, other.coords))

    def __sub__(self, other: "Element") -> "Element":
        _require_same_group(self.group, other.group, "elements")
        return Element(self.group, self.group.sub(self.coords, other.coords))

    def __neg__(self) -> "Element":
        return Element(self.group, self.group.neg(self.coords))


@dataclass(frozen=True)
class FiniteSet:
    """A finite subset of a group, stored as sorted distinct coordinate
    tuples so equal sets compare equal."""

    group: GroupSpec
    elements: tuple[Coords, ...]

    def __post_init__(self) -> None:
        reduced = {self.group.reduce(c) for c in self.elements}
        object.__setattr__(self, "elements", tuple(sorted(reduced)))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Coords]:
        return iter(self.elements)

    def __contains__(self, coords: Sequence[int]) -> bool:
        return self.group.reduce(coords) in set(self.elements)

    def negated(self) -> "FiniteSet":
        return FiniteSet(self.group, tuple(self.group.neg(c) for c in self))

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "elements": [list(c) for c in self.elements],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteSet":
        group = GroupSpec.from_json(obj["group"])
        return cls(group, tuple(tuple(e) for e in obj["elements"]))


def _require_nonempty(s: FiniteSet, name: str) -> None:
    if len(s) == 0:
        raise ValueError(f"set {name} must be nonempty")


def _combine(sign: str):
    if sign == "+":
        return lambda g, a, b: g.add(a, b)
    if sign == "-":
        return lambda g, a, b: g.sub(a, b)
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def sumset(a: FiniteSet, b: FiniteSet, sign: str = "+") -> FiniteSet:
    """The set of all pairwise sums (or differences) of two finite sets."""
    op = _combine(sign)
    _require_same_group(a.group, b.group, "sumset operands")
    _require_nonempty(a, "A")
    _require_nonempty(b, "B")
    g = a.group
    return FiniteSet(g, tuple(op(g, x, y) for x in a for y in b))


def restricted_sumset(
    a: FiniteSet,
    b: FiniteSet,
    pairs: Iterable[tuple[Sequence[int], Sequence[int]]],
    sign: str = "+",
) -> FiniteSet:
    """Sums (or differences) taken only over an allowed set of pairs.

    Every pair must lie in ``a x b``; the allowed-pair set must be nonempty.
    """
    op = _combine(sign)
    _require_same_group(a.group, b.group, "restricted sumset operands")
    g = a.group
    normalized = [(g.reduce(x), g.reduce(y)) for x, y in pairs]
    if not normalized:
        raise ValueError("restricted sumset needs at least one allowed pair")
    a_set, b_set = set(a.elements), set(b.elements)
    for x, y in normalized:
        if x not in a_set or y not in b_set:
            raise ValueError(f"pair ({x}, {y}) is not in A x B")
    return FiniteSet(g, tuple(op(g, x, y) for x, y in normalized))


@dataclass(frozen=True)
class LinearForm:
    """An integer linear form ``sum_i coefficients[i] * x_i``.

    The support is the tuple of positions with nonzero coefficient; image
    computations take one input set per support position.
    """

    coefficients: tuple[int, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(int(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("a linear form needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def arity(self) -> int:
        return len(self.coefficients)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coefficients) if c != 0)

    def apply(self, group: GroupSpec, vectors: Sequence[Sequence[int]]) -> Coords:
        """Evaluate the form on one vector per support position."""
        support = self.support
        if len(vectors) != len(support):
            raise ValueError(
                f"form has {len(support)} active positions, got "
                f"{len(vectors)} vectors"
            )
        acc = group.zero
        for pos, vec in zip(support, vectors):
            acc = group.add(acc, group.scale(self.coefficients[pos], vec))
        return acc

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coefficients):
            if c == 0:
                continue
            sign = "+" if c > 0 else "-"
            mag = "" if abs(c) == 1 else str(abs(c))
            parts.append(f"{sign}{mag}x{i + 1}")
        text = "".join(parts)
        return text.lstrip("+")


def linear_image(form: LinearForm, sets: Sequence[FiniteSet]) -> FiniteSet:
    """Image of a product of sets under an integer linear form.

    ``sets`` supplies one finite set per support position of the form.
    """
    support = form.support
    if not support:
        raise ValueError("form is identically zero")
    if len(sets) != len(support):
        raise ValueError(
            f"form has {len(support)} active positions, got {len(sets)} sets"
        )
    group = sets[0].group
    for s in sets[1:]:
        _require_same_group(group, s.group, "linear image inputs")
    for i, s in enumerate(sets):
        _require_nonempty(s, f"input {i}")
    out = set()
    for combo in itertools.product(*sets):
        out.add(form.apply(group, combo))
    return FiniteSet(group, tuple(out))


def ruzsa_distance(a: FiniteSet, b: FiniteSet) -> float:
    """log|A - B| - (1/2) log|A| - (1/2) log|B|, in nats."""
    diff = sumset(a, b, "-")
    return math.log(len(diff)) - 0.5 * math.log(len(a)) - 0.5 * math.log(len(b))


def _blocks(coords: Coords, block_dim: int) -> list[Coords]:
    return [
        coords[k * block_dim : (k + 1) * block_dim]
        for k in range(len(coords) // block_dim)
    ]


def _psi(coords: Coords, q: int, block_dim: int) -> Coords:
    """Base-q evaluation sending an m-tuple of Z^block_dim vectors to one
    Z^block_dim vector: component j becomes sum_k coords[k][j] * q^k."""
    out = [0] * block_dim
    power = 1
    for block in _blocks(coords, block_dim):
        for j in range(block_dim):
            out[j] += block[j] * power
        power *= q
    return tuple(out)


def _injective_on(s: FiniteSet, q: int, block_dim: int) -> bool:
    return len({_psi(c, q, block_dim) for c in s}) == len(s)


def _require_flattenable(group: GroupSpec, block_dim: int) -> None:
    if not group.is_torsion_free:
        raise ValueError("flattening requires a torsion-free group")
    if block_dim < 1 or group.dimension % block_dim:
        raise ValueError(
            f"block dimension {block_dim} does not divide {group.dimension}"
        )


def choose_q(
    sets: Sequence[FiniteSet],
    forms: Sequence[LinearForm],
    block_dim: int = 1,
) -> int:
    """Pick a base q making the flattening map injective on every form image.

    Starts at ``1 + 2 * (largest coordinate magnitude over all images)`` and
    doubles until a hash check confirms injectivity on each image set.
    """
    if not sets:
        raise ValueError("choose_q needs at least one set")
    for s in sets:
        _require_flattenable(s.group, block_dim)
        _require_nonempty(s, "input")
    images = []
    for form in forms:
        picked = [sets[i] for i in form.support]
        if any(i >= len(sets) for i in form.support):
            raise ValueError(
                f"form {form} refers to position beyond the {len(sets)} sets"
            )
        images.append(linear_image(form, picked))
    max_mag = 0
    for img in images:
        for coords in img:
            for c in coords:
                max_mag = max(max_mag, abs(c))
    q = 1 + 2 * max_mag
    for _ in range(128):
        if all(_injective_on(img, q, block_dim) for img in images):
            return q
        q *= 2
    raise RuntimeError("no injective base found after 128 doublings")


def flatten(a: FiniteSet, q: int, block_dim: int = 1) -> FiniteSet:
    """Apply the base-q map blockwise, landing in Z^block_dim.

    The caller is responsible for q being injective on ``a`` (for example
    via :func:`choose_q`); collisions silently shrink the image.
    """
    _require_flattenable(a.group, block_dim)
    if q < 1:
        raise ValueError(f"base must be >= 1, got {q}")
    target = GroupSpec.integers(block_dim)
    return FiniteSet(target, tuple(_psi(c, q, block_dim) for c in a))
