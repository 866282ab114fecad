"""Transportation polytope: the exact linear oracle against brute-force
vertex enumeration, and the entropy maximizer against the grid oracle."""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from entroset import (
    Coupling,
    Dist,
    GroupSpec,
    LinearForm,
    d_hr,
    grid_oracle,
    max_pushforward_entropy,
    pushforward_dist,
    pushforward_entropy,
    transport_lmo,
)

Z1 = GroupSpec.integers(1)
DIFF = LinearForm((1, -1))
SUM = LinearForm((1, 1))


def uniform_on(*values):
    return Dist.uniform([(v,) for v in values], Z1)


# --- brute-force vertex enumeration -------------------------------------
#
# Vertices of the transportation polytope are exactly the feasible fillings
# whose support is a forest in the bipartite row/column graph; on a forest
# the filling is forced by leaf peeling.  Enumerating all cell subsets of
# size <= m+n-1 therefore recovers every vertex at toy sizes.


def _fill_forest(support, rows, cols):
    need_r, need_c = list(rows), list(cols)
    remaining = set(support)
    fill = {}
    while remaining:
        leaf = None
        for i, j in remaining:
            if sum(1 for a, b in remaining if a == i) == 1:
                leaf = (i, j, "row")
                break
            if sum(1 for a, b in remaining if b == j) == 1:
                leaf = (i, j, "col")
                break
        if leaf is None:  # a cycle: not a forest
            return None
        i, j, side = leaf
        v = need_r[i] if side == "row" else need_c[j]
        fill[(i, j)] = v
        need_r[i] -= v
        need_c[j] -= v
        remaining.remove((i, j))
    if any(abs(v) > 1e-12 for v in need_r + need_c):
        return None
    if any(v < -1e-12 for v in fill.values()):
        return None
    return fill


def transport_vertices(rows, cols):
    m, n = len(rows), len(cols)
    cells = [(i, j) for i in range(m) for j in range(n)]
    seen = set()
    out = []
    for k in range(1, m + n):
        for support in itertools.combinations(cells, k):
            fill = _fill_forest(support, rows, cols)
            if fill is None:
                continue
            mat = np.zeros((m, n))
            for (i, j), v in fill.items():
                mat[i, j] = max(v, 0.0)
            key = tuple(np.round(mat, 9).ravel())
            if key not in seen:
                seen.add(key)
                out.append(mat)
    return out


def random_marginals(rng, max_support=3):
    def one():
        k = rng.randint(1, max_support)
        atoms = rng.sample(range(-4, 5), k)
        return Dist.from_weights(
            {(a,): rng.randint(1, 9) for a in atoms}, Z1
        )

    return one(), one()


class TestTransportLmo:
    def test_matches_vertex_enumeration(self):
        rng = random.Random(2024)
        for _ in range(40):
            row, col = random_marginals(rng)
            cost = np.array(
                [[rng.uniform(-2, 2) for _ in col.atoms] for _ in row.atoms]
            )
            got = transport_lmo(row, col, cost)
            best = min(
                float((cost * v).sum())
                for v in transport_vertices(row.float_probs(), col.float_probs())
            )
            achieved = float((cost * got.mass).sum())
            assert achieved <= best + 1e-9, f"lmo cost {achieved} > oracle {best}"
            assert achieved >= best - 1e-9
            assert got.is_extreme()

    def test_identity_cost_prefers_diagonal(self):
        row = uniform_on(0, 1)
        col = uniform_on(0, 1)
        cost = np.array([[0.0, 1.0], [1.0, 0.0]])
        plan = transport_lmo(row, col, cost)
        assert plan.mass[0, 0] == pytest.approx(0.5)
        assert plan.mass[1, 1] == pytest.approx(0.5)

    def test_degenerate_single_column(self):
        row = Dist.from_weights({(0,): 2, (1,): 1, (5,): 1}, Z1)
        col = Dist.uniform([(3,)], Z1)
        plan = transport_lmo(row, col, np.zeros((3, 1)))
        assert np.allclose(plan.mass[:, 0], row.float_probs())


class TestCoupling:
    def test_independent_coupling_is_feasible(self):
        c = Coupling.independent(uniform_on(0, 1), uniform_on(0, 2, 4))
        assert c.mass.shape == (2, 3)
        assert abs(c.mass.sum() - 1) < 1e-12

    def test_marginal_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Coupling(uniform_on(0, 1), uniform_on(0, 1), np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_negative_mass_rejected(self):
        bad = np.array([[0.6, -0.1], [-0.1, 0.6]])
        with pytest.raises(ValueError):
            Coupling(uniform_on(0, 1), uniform_on(0, 1), bad)

    def test_extremality(self):
        row = col = uniform_on(0, 1)
        perm = Coupling(row, col, np.array([[0.5, 0.0], [0.0, 0.5]]))
        assert perm.is_extreme()
        assert not Coupling.independent(row, col).is_extreme()


class TestPushforward:
    def test_difference_of_independent_binaries(self):
        c = Coupling.independent(uniform_on(0, 1), uniform_on(0, 1))
        d = pushforward_dist(c, DIFF)
        assert d.to_mapping() == {
            (-1,): pytest.approx(0.25),
            (0,): pytest.approx(0.5),
            (1,): pytest.approx(0.25),
        }

    def test_sum_entropy_of_point_masses_is_zero(self):
        c = Coupling.independent(
            Dist.point_mass((3,), Z1), Dist.point_mass((-3,), Z1)
        )
        assert pushforward_entropy(c, SUM) == 0.0

    def test_modular_collapse(self):
        g = GroupSpec.cyclic(2)
        row = col = Dist.uniform([(0,), (1,)], g)
        c = Coupling(row, col, np.array([[0.5, 0.0], [0.0, 0.5]]))
        # x + y lands on 0 both times mod 2... on the diagonal 0+0=0, 1+1=0.
        assert pushforward_entropy(c, SUM) == 0.0


class TestMaxPushforwardEntropy:
    def test_uniform_binary_difference_reaches_log3(self):
        res = max_pushforward_entropy(uniform_on(0, 1), uniform_on(0, 1), DIFF)
        assert res.converged
        assert res.duality_gap <= 1e-8
        assert abs(res.value - math.log(3)) < 1e-9

    def test_value_within_grid_oracle_band(self):
        rng = random.Random(99)
        for _ in range(8):
            row, col = random_marginals(rng)
            for form in (SUM, DIFF):
                res = max_pushforward_entropy(row, col, form)
                oracle = grid_oracle(row, col, form, resolution=1e-3)
                assert res.duality_gap <= 1e-8
                assert oracle - 1e-6 <= res.value <= oracle + 5e-3, (
                    f"value {res.value} vs oracle {oracle}"
                )

    def test_gap_certifies_the_maximum(self):
        row = Dist.from_weights({(0,): 1, (2,): 3}, Z1)
        col = Dist.from_weights({(0,): 2, (1,): 1, (3,): 1}, Z1)
        res = max_pushforward_entropy(row, col, DIFF)
        oracle = grid_oracle(row, col, DIFF, resolution=1e-3)
        assert oracle <= res.value + res.duality_gap + 1e-9

    def test_returned_coupling_attains_the_value(self):
        row, col = uniform_on(0, 1, 2), uniform_on(0, 5)
        res = max_pushforward_entropy(row, col, SUM)
        assert pushforward_entropy(res.coupling, SUM) == pytest.approx(res.value)

    def test_singleton_times_singleton(self):
        res = max_pushforward_entropy(
            Dist.point_mass((1,), Z1), Dist.point_mass((2,), Z1), SUM
        )
        assert res.value == 0.0

    def test_groupless_marginals_rejected(self):
        with pytest.raises(ValueError):
            max_pushforward_entropy(Dist.uniform([(0,)]), uniform_on(0), SUM)

    def test_json_shape(self):
        res = max_pushforward_entropy(uniform_on(0, 1), uniform_on(0, 1), DIFF)
        obj = res.to_json()
        assert set(obj) == {"value", "duality_gap", "iterations", "converged"}
        assert "coupling" in res.to_json(include_coupling=True)


class TestGridOracle:
    def test_binary_case_close_to_log3(self):
        val = grid_oracle(uniform_on(0, 1), uniform_on(0, 1), DIFF, resolution=1e-3)
        assert abs(val - math.log(3)) < 2e-3

    def test_large_free_dimension_rejected(self):
        big = uniform_on(0, 1, 2, 3)
        with pytest.raises(ValueError):
            grid_oracle(big, big, DIFF)


class TestDhr:
    def test_uniform_binary_value(self):
        val = d_hr(uniform_on(0, 1), uniform_on(0, 1))
        assert abs(val - (math.log(3) - math.log(2))) < 1e-6

    def test_point_masses_at_distance_zero(self):
        val = d_hr(Dist.point_mass((4,), Z1), Dist.point_mass((0,), Z1))
        assert abs(val) < 1e-9

    def test_nonnegative_on_random_pairs(self):
        rng = random.Random(5)
        for _ in range(6):
            row, col = random_marginals(rng)
            assert d_hr(row, col) >= -1e-7
