"""Group arithmetic: sumsets, linear images, Ruzsa distance, flattening."""

import math
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entroset import (
    FiniteSet,
    GroupSpec,
    LinearForm,
    choose_q,
    flatten,
    linear_image,
    restricted_sumset,
    ruzsa_distance,
    sumset,
)

Z1 = GroupSpec.integers(1)
Z2 = GroupSpec.integers(2)


def zset(*values):
    return FiniteSet(Z1, tuple((v,) for v in values))


def brute_sumset(a, b, sign="+"):
    """Oracle: elementwise loop over the product, no shared code path."""
    out = set()
    for x in a.elements:
        for y in b.elements:
            if sign == "+":
                out.add(a.group.reduce(tuple(u + v for u, v in zip(x, y))))
            else:
                out.add(a.group.reduce(tuple(u - v for u, v in zip(x, y))))
    return out


class TestGroupSpec:
    def test_reduce_wraps_modular_coordinates(self):
        g = GroupSpec.cyclic(5)
        assert g.reduce((7,)) == (2,)
        assert g.reduce((-1,)) == (4,)

    def test_reduce_leaves_free_coordinates(self):
        assert Z1.reduce((-13,)) == (-13,)

    def test_mixed_moduli(self):
        g = GroupSpec(2, (0, 3))
        assert g.add((5, 2), (1, 2)) == (6, 1)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            GroupSpec(0, ())
        with pytest.raises(ValueError):
            GroupSpec(2, (0,))

    def test_cyclic_requires_modulus_at_least_two(self):
        with pytest.raises(ValueError):
            GroupSpec.cyclic(1)


class TestSumset:
    def test_frozen_integer_example(self):
        a = zset(0, 1)
        b = zset(0, 2)
        assert set(sumset(a, b).elements) == {(0,), (1,), (2,), (3,)}

    def test_frozen_difference_example(self):
        # Oracle (enumeration): {0,1,3} - {0,2} = {-2,-1,0,1,3}.
        a = zset(0, 1, 3)
        b = zset(0, 2)
        assert set(sumset(a, b, "-").elements) == {(-2,), (-1,), (0,), (1,), (3,)}

    def test_cyclic_wraparound(self):
        g = GroupSpec.cyclic(5)
        a = FiniteSet(g, ((3,), (4,)))
        b = FiniteSet(g, ((2,),))
        assert set(sumset(a, b).elements) == {(0,), (1,)}

    def test_singleton_translate(self):
        a = zset(2, 5, 9)
        t = zset(10)
        assert set(sumset(a, t).elements) == {(12,), (15,), (19,)}

    def test_empty_operand_rejected(self):
        with pytest.raises(ValueError):
            sumset(zset(0), FiniteSet(Z1, ()))

    def test_mismatched_groups_rejected(self):
        with pytest.raises(ValueError):
            sumset(zset(0), FiniteSet(GroupSpec.cyclic(3), ((0,),)))

    def test_bad_sign_rejected(self):
        with pytest.raises(ValueError):
            sumset(zset(0), zset(0), "*")


small_sets = st.lists(
    st.integers(min_value=-6, max_value=6), min_size=1, max_size=5
).map(lambda vs: zset(*vs))


@given(small_sets, small_sets)
def test_sumset_matches_brute_force(a, b):
    assert set(sumset(a, b).elements) == brute_sumset(a, b)
    assert set(sumset(a, b, "-").elements) == brute_sumset(a, b, "-")


@given(small_sets, small_sets)
def test_sumset_size_bounds(a, b):
    s = sumset(a, b)
    assert max(len(a), len(b)) <= len(s) <= len(a) * len(b)


@given(small_sets, small_sets)
def test_difference_set_negation_symmetry(a, b):
    # A - B = -(B - A) in any abelian group, so the sizes agree.
    assert len(sumset(a, b, "-")) == len(sumset(b, a, "-"))


class TestRestrictedSumset:
    def test_full_pair_set_recovers_sumset(self):
        a, b = zset(0, 1, 3), zset(0, 2)
        pairs = list(product(a.elements, b.elements))
        assert restricted_sumset(a, b, pairs) == sumset(a, b)

    def test_partial_pairs(self):
        a, b = zset(0, 1), zset(0, 10)
        out = restricted_sumset(a, b, [((0,), (0,)), ((1,), (10,))])
        assert set(out.elements) == {(0,), (11,)}

    def test_pair_outside_product_rejected(self):
        with pytest.raises(ValueError):
            restricted_sumset(zset(0), zset(0), [((1,), (0,))])

    def test_empty_pair_set_rejected(self):
        with pytest.raises(ValueError):
            restricted_sumset(zset(0), zset(0), [])


class TestLinearImage:
    def test_two_variable_form(self):
        form = LinearForm((1, -1))
        img = linear_image(form, [zset(0, 1, 3), zset(0, 2)])
        assert img == sumset(zset(0, 1, 3), zset(0, 2), "-")

    def test_weighted_form(self):
        # 2x + y on {0,1} x {0,1} -> {0,1,2,3}
        img = linear_image(LinearForm((2, 1)), [zset(0, 1), zset(0, 1)])
        assert set(img.elements) == {(0,), (1,), (2,), (3,)}

    def test_zero_coefficients_are_skipped(self):
        form = LinearForm((1, 0, 1))
        img = linear_image(form, [zset(1), zset(5)])
        assert set(img.elements) == {(6,)}

    def test_identically_zero_form_rejected(self):
        with pytest.raises(ValueError):
            linear_image(LinearForm((0, 0)), [])

    def test_arity_mismatch_rejected(self):
        with pytest.raises(ValueError):
            linear_image(LinearForm((1, 1)), [zset(0)])


class TestRuzsaDistance:
    def test_frozen_binary_value(self):
        # |{0,1} - {0,1}| = 3, both sizes 2: log 3 - log 2.
        d = ruzsa_distance(zset(0, 1), zset(0, 1))
        assert abs(d - math.log(3 / 2)) < 1e-12

    def test_singletons_at_distance_zero(self):
        assert ruzsa_distance(zset(7), zset(-2)) == 0.0

    @given(small_sets, small_sets)
    def test_symmetric(self, a, b):
        assert abs(ruzsa_distance(a, b) - ruzsa_distance(b, a)) < 1e-12

    @given(small_sets, small_sets)
    def test_nonnegative(self, a, b):
        # |A - B| >= max(|A|, |B|) >= sqrt(|A||B|).
        assert ruzsa_distance(a, b) >= -1e-12

    @settings(max_examples=60)
    @given(small_sets, small_sets, small_sets)
    def test_triangle_inequality(self, a, b, c):
        lhs = ruzsa_distance(a, c)
        rhs = ruzsa_distance(a, b) + ruzsa_distance(b, c)
        assert lhs <= rhs + 1e-9, f"{lhs} > {rhs}"


class TestFlatten:
    def test_plane_set_flattens_injectively(self):
        a = FiniteSet(Z2, ((0, 0), (1, 2), (-3, 1), (2, 2)))
        q = choose_q([a], [LinearForm((1,))])
        flat = flatten(a, q)
        assert flat.group == Z1
        assert len(flat) == len(a)

    def test_chosen_base_keeps_sum_and_difference_sizes(self):
        a = FiniteSet(Z2, ((0, 0), (1, 0), (0, 1), (2, 2)))
        b = FiniteSet(Z2, ((0, 0), (1, 1)))
        forms = [LinearForm((1, 1)), LinearForm((1, -1))]
        q = choose_q([a, b], forms + [LinearForm((1,)), LinearForm((0, 1))])
        fa, fb = flatten(a, q), flatten(b, q)
        assert len(sumset(fa, fb)) == len(sumset(a, b))
        assert len(sumset(fa, fb, "-")) == len(sumset(a, b, "-"))

    def test_flatten_is_a_homomorphism_on_sums(self):
        a = FiniteSet(Z2, ((0, 0), (1, 2)))
        b = FiniteSet(Z2, ((3, 1), (0, 0)))
        q = choose_q([a, b], [LinearForm((1, 1))])
        assert sumset(flatten(a, q), flatten(b, q)) == flatten(sumset(a, b), q)

    def test_small_base_may_collide(self):
        a = FiniteSet(Z2, ((0, 1), (1, 0)))
        assert len(flatten(a, 1)) == 1

    def test_torsion_group_rejected(self):
        g = GroupSpec.cyclic(4)
        with pytest.raises(ValueError):
            flatten(FiniteSet(g, ((0,),)), 3)

    def test_block_dim_must_divide_dimension(self):
        a = FiniteSet(Z2, ((0, 0),))
        with pytest.raises(ValueError):
            flatten(a, 5, block_dim=3)
