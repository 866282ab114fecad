"""Finite discrete probability distributions.

Probabilities may be floats or ``fractions.Fraction``; arithmetic done by
consumers preserves whichever type was supplied, and entropies are always
evaluated in float nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .groups import GroupSpec

#: Mass at or below this threshold is treated as structurally zero.
PRUNE_EPS = 1e-12

__all__ = ["Dist", "shannon_entropy", "PRUNE_EPS"]


def shannon_entropy(probs: Iterable) -> float:
    """Entropy in nats with the 0 log 0 = 0 convention."""
    acc = 0.0
    for p in probs:
        x = float(p)
        if x > 0.0:
            acc -= x * math.log(x)
    return acc


@dataclass(frozen=True)
class Dist:
    """A probability distribution on a finite set of hashable atoms.

    Atoms with mass <= ``PRUNE_EPS`` are dropped, the support is sorted when
    the atoms are orderable, and the total mass must be 1 up to 1e-12.
    ``group`` is set when the atoms are coordinate tuples of a group, which
    enables pushforwards under group maps.
    """

    atoms: tuple
    probs: tuple
    group: GroupSpec | None = None

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.probs):
            raise ValueError(
                f"{len(self.atoms)} atoms but {len(self.probs)} probabilities"
            )
        total = math.fsum(float(p) for p in self.probs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        pairs = []
        seen = set()
        for atom, p in zip(self.atoms, self.probs):
            if self.group is not None:
                atom = self.group.reduce(atom)
            if float(p) < -1e-9:
                raise ValueError(f"negative probability {p!r} at atom {atom!r}")
            if float(p) <= PRUNE_EPS:
                continue
            if atom in seen:
                raise ValueError(f"duplicate atom {atom!r}")
            seen.add(atom)
            pairs.append((atom, p))
        if not pairs:
            raise ValueError("distribution has empty support")
        try:
            pairs.sort(key=lambda kv: kv[0])
        except TypeError:
            pass
        object.__setattr__(self, "atoms", tuple(a for a, _ in pairs))
        object.__setattr__(self, "probs", tuple(p for _, p in pairs))

    @classmethod
    def from_weights(
        cls, weighted: Mapping | Iterable[tuple], group: GroupSpec | None = None
    ) -> "Dist":
        """Normalize nonnegative weights; Fractions and ints stay exact."""
        items = list(weighted.items()) if isinstance(weighted, Mapping) else list(weighted)
        if not items:
            raise ValueError("no weights given")
        total = sum(w for _, w in items)
        if isinstance(total, int):
            total = Fraction(total)
        if float(total) <= 0:
            raise ValueError("total weight must be positive")
        return cls(
            tuple(a for a, _ in items),
            tuple(w / total for _, w in items),
            group,
        )

    @classmethod
    def uniform(cls, atoms: Iterable, group: GroupSpec | None = None) -> "Dist":
        atoms = tuple(atoms)
        if not atoms:
            raise ValueError("uniform distribution needs atoms")
        p = Fraction(1, len(atoms))
        return cls(atoms, (p,) * len(atoms), group)

    @classmethod
    def point_mass(cls, atom: Hashable, group: GroupSpec | None = None) -> "Dist":
        return cls((atom,), (Fraction(1),), group)

    @property
    def support(self) -> tuple:
        return self.atoms

    def __len__(self) -> int:
        return len(self.atoms)

    def prob(self, atom: Hashable):
        if self.group is not None:
            atom = self.group.reduce(atom)
        for a, p in zip(self.atoms, self.probs):
            if a == atom:
                return p
        return 0

    def to_mapping(self) -> dict:
        return dict(zip(self.atoms, self.probs))

    def entropy(self) -> float:
        """Shannon entropy in nats."""
        return shannon_entropy(self.probs)

    def push(self, fn: Callable, group: GroupSpec | None = None) -> "Dist":
        """Pushforward under an arbitrary map on atoms."""
        out: dict = {}
        for a, p in zip(self.atoms, self.probs):
            key = fn(a)
            out[key] = out.get(key, 0) + p
        return Dist(tuple(out), tuple(out.values()), group)

    def float_probs(self) -> tuple[float, ...]:
        return tuple(float(p) for p in self.probs)

    def to_json(self) -> dict:
        obj: dict = {"probs": [float(p) for p in self.probs]}
        if self.group is not None:
            obj["group"] = self.group.to_json()
            obj["atoms"] = [list(a) for a in self.atoms]
        else:
            obj["atoms"] = list(self.atoms)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Dist":
        group = GroupSpec.from_json(obj["group"]) if "group" in obj else None
        atoms = (
            tuple(tuple(a) for a in obj["atoms"])
            if group is not None
            else tuple(obj["atoms"])
        )
        raw = [float(p) for p in obj["probs"]]
        total = math.fsum(raw)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"serialized probabilities sum to {total!r}")
        return cls(atoms, tuple(p / total for p in raw), group)
