import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entroset import Dist, GroupSpec, shannon_entropy


def test_entropy_of_uniform_is_log_n():
    for n in (1, 2, 3, 8):
        d = Dist.uniform(range(n))
        assert abs(d.entropy() - math.log(n)) < 1e-12


def test_entropy_frozen_biased_coin():
    # H(1/4, 3/4) = 2 log 2 - (3/4) log 3, worked by hand.
    d = Dist(("h", "t"), (Fraction(1, 4), Fraction(3, 4)))
    expect = 2 * math.log(2) - 0.75 * math.log(3)
    assert abs(d.entropy() - expect) < 1e-12


def test_zero_mass_atoms_are_pruned():
    d = Dist(("a", "b", "c"), (0.5, 0.0, 0.5))
    assert d.atoms == ("a", "c")


def test_point_mass_entropy_zero():
    assert Dist.point_mass("x").entropy() == 0.0


def test_duplicate_atoms_rejected():
    with pytest.raises(ValueError):
        Dist(("a", "a"), (0.5, 0.5))


def test_mass_must_sum_to_one():
    with pytest.raises(ValueError):
        Dist(("a", "b"), (0.5, 0.4))


def test_negative_mass_rejected():
    with pytest.raises(ValueError):
        Dist(("a", "b"), (1.2, -0.2))


def test_empty_support_rejected():
    with pytest.raises(ValueError):
        Dist((), ())


def test_from_weights_keeps_fractions_exact():
    d = Dist.from_weights({"a": 3, "b": 5})
    assert d.prob("a") == Fraction(3, 8)
    assert d.prob("b") == Fraction(5, 8)
    assert isinstance(d.prob("a"), Fraction)


def test_group_atoms_are_canonically_reduced():
    g = GroupSpec.cyclic(4)
    d = Dist(((5,), (2,)), (Fraction(1, 2), Fraction(1, 2)), g)
    assert d.atoms == ((1,), (2,))
    assert d.prob((-3,)) == Fraction(1, 2)


def test_reduction_collision_is_a_duplicate():
    g = GroupSpec.cyclic(3)
    with pytest.raises(ValueError):
        Dist(((0,), (3,)), (0.5, 0.5), g)


def test_push_merges_fibers():
    d = Dist.from_weights({(0,): 1, (1,): 2, (2,): 1}, GroupSpec.integers(1))
    parity = d.push(lambda a: a[0] % 2)
    assert parity.prob(0) == Fraction(1, 2)
    assert parity.prob(1) == Fraction(1, 2)


def test_push_entropy_never_increases():
    d = Dist.from_weights({i: w for i, w in enumerate([3, 1, 4, 1, 5])})
    merged = d.push(lambda a: a // 2)
    assert merged.entropy() <= d.entropy() + 1e-12


def test_json_round_trip():
    g = GroupSpec(2, (0, 3))
    d = Dist.from_weights({(0, 1): 1, (2, 2): 3}, g)
    back = Dist.from_json(d.to_json())
    assert back.atoms == d.atoms
    assert back.group == g
    assert all(abs(float(p) - float(q)) < 1e-12 for p, q in zip(back.probs, d.probs))


def test_json_round_trip_plain_atoms():
    d = Dist.uniform(["x", "y", "z"])
    back = Dist.from_json(d.to_json())
    assert back.atoms == d.atoms


weights = st.lists(st.integers(min_value=1, max_value=9), min_size=1, max_size=6)


@given(weights)
def test_entropy_bounded_by_log_support(ws):
    d = Dist.from_weights(dict(enumerate(ws)))
    assert -1e-12 <= d.entropy() <= math.log(len(d)) + 1e-12


@given(weights)
def test_probs_sum_to_one_exactly_for_rationals(ws):
    d = Dist.from_weights(dict(enumerate(ws)))
    assert sum(d.probs, Fraction(0)) == 1


def test_shannon_entropy_ignores_zeros():
    assert shannon_entropy([0.5, 0.0, 0.5]) == shannon_entropy([0.5, 0.5])
