"""Method of types over a finite alphabet: exact enumeration of empirical
distributions, exact type-class counting, large-deviation rates by direct
summation, and typical-set growth of coordinate-wise sumsets.

Logarithms inside this module are base 2, matching the usual 2^{+-n(.)}
counting statements; ``sumset_growth_rate`` converts to nats at the
boundary since its limit is a coupling entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .dist import Dist
from .groups import GroupSpec

__all__ = [
    "TypeVector",
    "TypicalSetConfig",
    "SanovEvent",
    "count_types",
    "enumerate_types",
    "nearest_type",
    "type_class_size",
    "entropy_bits",
    "kl_bits",
    "type_log_probability",
    "sanov_exact",
    "default_band_width",
    "typical_counts_band",
    "typical_set_size",
    "sumset_typical_count",
    "sumset_growth_rate",
]

#: Guard on the number of types enumerated in one call.
MAX_TYPES = 10_000_000

SanovEvent = Callable[[tuple[float, ...]], bool]


@dataclass(frozen=True)
class TypeVector:
    """An empirical distribution with denominator n: counts summing to n."""

    n: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if self.n < 1:
            raise ValueError(f"denominator must be >= 1, got {self.n}")
        if any(c < 0 for c in counts):
            raise ValueError(f"negative counts in {counts}")
        if sum(counts) != self.n:
            raise ValueError(f"counts {counts} do not sum to {self.n}")
        object.__setattr__(self, "counts", counts)

    @property
    def alphabet_size(self) -> int:
        return len(self.counts)

    @property
    def probs(self) -> tuple[float, ...]:
        return tuple(c / self.n for c in self.counts)


def count_types(alphabet_size: int, n: int) -> int:
    """Number of empirical distributions with denominator n: the stars and
    bars count C(n + M - 1, M - 1)."""
    if alphabet_size < 1 or n < 1:
        raise ValueError("alphabet size and denominator must be >= 1")
    return math.comb(n + alphabet_size - 1, alphabet_size - 1)


def enumerate_types(alphabet_size: int, n: int) -> Iterator[TypeVector]:
    """All type vectors with the given denominator, lexicographic order."""
    total = count_types(alphabet_size, n)
    if total > MAX_TYPES:
        raise ValueError(f"{total} types exceed the {MAX_TYPES} enumeration cap")

    def compositions(remaining: int, parts: int):
        if parts == 1:
            yield (remaining,)
            return
        for head in range(remaining + 1):
            for tail in compositions(remaining - head, parts - 1):
                yield (head,) + tail

    for counts in compositions(n, alphabet_size):
        yield TypeVector(n, counts)


def nearest_type(mu: Sequence[float], n: int) -> TypeVector:
    """A type at L-infinity distance at most 1/n from ``mu`` whose support
    is contained in the support of ``mu``.

    Floors n*mu, then greedily grants the missing units to the largest
    fractional parts (never exceeding the ceiling, so zero-mass symbols
    stay at zero).
    """
    mu = [float(p) for p in mu]
    if abs(math.fsum(mu) - 1.0) > 1e-9 or any(p < 0 for p in mu):
        raise ValueError("mu must be a probability vector")
    scaled = [n * p for p in mu]
    counts = [math.floor(s) for s in scaled]
    deficit = n - sum(counts)
    order = sorted(
        range(len(mu)), key=lambda i: (counts[i] - scaled[i], i)
    )
    for i in order:
        if deficit == 0:
            break
        if counts[i] < math.ceil(scaled[i]):
            counts[i] += 1
            deficit -= 1
    if deficit != 0:
        raise RuntimeError(f"could not place {deficit} remaining units")
    return TypeVector(n, tuple(counts))


def type_class_size(tv: TypeVector) -> int:
    """Exact number of sequences with the given empirical counts."""
    size = math.factorial(tv.n)
    for c in tv.counts:
        size //= math.factorial(c)
    return size


def entropy_bits(probs: Sequence[float]) -> float:
    """Entropy in bits with 0 log 0 = 0."""
    acc = 0.0
    for p in probs:
        p = float(p)
        if p > 0.0:
            acc -= p * math.log2(p)
    return acc


def kl_bits(nu: Sequence[float], mu: Sequence[float]) -> float:
    """Relative entropy D(nu || mu) in bits; +inf off the support of mu."""
    if len(nu) != len(mu):
        raise ValueError("vectors must have equal length")
    acc = 0.0
    for p, q in zip(nu, mu):
        p, q = float(p), float(q)
        if p == 0.0:
            continue
        if q == 0.0:
            return math.inf
        acc += p * math.log2(p / q)
    return acc


def type_log_probability(mu: Sequence[float], tv: TypeVector) -> float:
    """log2 of the probability that n i.i.d. draws from ``mu`` have
    empirical type ``tv``; -inf when the type leaves the support."""
    if len(mu) != tv.alphabet_size:
        raise ValueError("alphabet size mismatch")
    log_p = float(math.log2(type_class_size(tv)))
    for c, q in zip(tv.counts, mu):
        q = float(q)
        if c == 0:
            continue
        if q == 0.0:
            return -math.inf
        log_p += c * math.log2(q)
    return log_p


def sanov_exact(mu: Sequence[float], event: SanovEvent, n: int) -> float:
    """(1/n) log2 P(empirical type lands in the event), by direct summation
    over all types; -inf when no type with denominator n satisfies it.

    The result is cross-checked against the large-deviation sandwich
    -min D - (M-1) log2(n+1)/n <= result <= -min D, with the minimum of
    the relative entropy taken over event types.
    """
    log_terms = []
    best_kl = math.inf
    hit = False
    for tv in enumerate_types(len(mu), n):
        if not event(tv.probs):
            continue
        hit = True
        best_kl = min(best_kl, kl_bits(tv.probs, mu))
        lp = type_log_probability(mu, tv)
        if lp > -math.inf:
            log_terms.append(lp)
    if not log_terms:
        return -math.inf
    peak = max(log_terms)
    total = math.fsum(2.0 ** (lp - peak) for lp in log_terms)
    result = (peak + math.log2(total)) / n
    assert hit
    upper = -best_kl
    lower = upper - (len(mu) - 1) * math.log2(n + 1) / n
    if not (lower - 1e-9 <= result <= upper + 1e-9):
        raise RuntimeError(
            f"summed probability {result} escapes the sandwich [{lower}, {upper}]"
        )
    return result


def default_band_width(n: int) -> float:
    """Relative half-width n^(-1/4): shrinks, but slower than 1/sqrt(n)."""
    return n ** -0.25


@dataclass(frozen=True)
class TypicalSetConfig:
    """Typical sequences of length n for a base law: every symbol count
    within a relative band of its expectation."""

    base: tuple[float, ...]
    n: int
    omega: float | None = None

    def __post_init__(self) -> None:
        base = tuple(float(p) for p in self.base)
        if abs(math.fsum(base) - 1.0) > 1e-9 or any(p < 0 for p in base):
            raise ValueError("base must be a probability vector")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        omega = self.omega if self.omega is not None else default_band_width(self.n)
        if not 0 < omega:
            raise ValueError(f"band width must be positive, got {omega}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "omega", float(omega))


def typical_counts_band(cfg: TypicalSetConfig) -> list[tuple[int, int]]:
    """Per-symbol inclusive count bounds |k - n p| <= n p omega."""
    bounds = []
    for p in cfg.base:
        center = cfg.n * p
        half = center * cfg.omega
        lo = max(0, math.ceil(center - half - 1e-12))
        hi = min(cfg.n, math.floor(center + half + 1e-12))
        bounds.append((lo, hi))
    return bounds


def _band_types(cfg: TypicalSetConfig) -> Iterator[TypeVector]:
    bounds = typical_counts_band(cfg)

    def walk(i: int, remaining: int, prefix: tuple[int, ...]):
        if i == len(bounds) - 1:
            lo, hi = bounds[-1]
            if lo <= remaining <= hi:
                yield prefix + (remaining,)
            return
        lo, hi = bounds[i]
        for c in range(lo, min(hi, remaining) + 1):
            yield from walk(i + 1, remaining - c, prefix + (c,))

    for counts in walk(0, cfg.n, ()):
        yield TypeVector(cfg.n, counts)


def typical_set_size(cfg: TypicalSetConfig) -> int:
    """Exact number of length-n strings typical for the base law."""
    return sum(type_class_size(tv) for tv in _band_types(cfg))


def _group_support(d: Dist) -> list:
    if d.group is None:
        raise ValueError("distribution must carry a group")
    if not d.group.is_torsion_free:
        raise ValueError("sumset growth requires a torsion-free group")
    return list(d.atoms)


def sumset_typical_count(
    p_x: Dist, p_y: Dist, n: int, omega: float | None = None
) -> int:
    """Exact size of (typical set of X) + (typical set of Y), the sums
    taken coordinate-wise over length-n strings.

    Both typical sets are unions of type classes, so their sumset is the
    union of the classes of all sums realizable by a joint type whose
    marginals are both within their bands; the size is the sum of exact
    class sizes over the distinct pushforward types.
    """
    sup_x = _group_support(p_x)
    sup_y = _group_support(p_y)
    group = p_x.group
    if group != p_y.group:
        raise ValueError("marginals live on different groups")
    if len(sup_x) * len(sup_y) > 9:
        raise ValueError(
            f"product alphabet {len(sup_x)}x{len(sup_y)} exceeds 9 symbols"
        )
    if count_types(len(sup_x) * len(sup_y), n) > MAX_TYPES:
        raise ValueError("joint type enumeration too large")
    band_x = typical_counts_band(
        TypicalSetConfig(tuple(p_x.float_probs()), n, omega)
    )
    band_y = typical_counts_band(
        TypicalSetConfig(tuple(p_y.float_probs()), n, omega)
    )
    sums = [
        [group.add(x, y) for y in sup_y] for x in sup_x
    ]
    sum_alphabet = sorted({z for row in sums for z in row})
    z_index = {z: k for k, z in enumerate(sum_alphabet)}
    seen: set[tuple[int, ...]] = set()
    for tv in enumerate_types(len(sup_x) * len(sup_y), n):
        counts = tv.counts
        ok = True
        for i in range(len(sup_x)):
            row = sum(counts[i * len(sup_y) + j] for j in range(len(sup_y)))
            lo, hi = band_x[i]
            if not lo <= row <= hi:
                ok = False
                break
        if not ok:
            continue
        for j in range(len(sup_y)):
            col = sum(counts[i * len(sup_y) + j] for i in range(len(sup_x)))
            lo, hi = band_y[j]
            if not lo <= col <= hi:
                ok = False
                break
        if not ok:
            continue
        pushed = [0] * len(sum_alphabet)
        for i in range(len(sup_x)):
            for j in range(len(sup_y)):
                pushed[z_index[sums[i][j]]] += counts[i * len(sup_y) + j]
        seen.add(tuple(pushed))
    return sum(type_class_size(TypeVector(n, counts)) for counts in seen)


def sumset_growth_rate(
    p_x: Dist, p_y: Dist, n: int, omega: float | None = None
) -> float:
    """(1/n) log of the typical-sumset size, in nats.

    As n grows (with the default band schedule) this approaches the
    maximum over couplings of H(X + Y).
    """
    count = sumset_typical_count(p_x, p_y, n, omega)
    return math.log(count) / n
