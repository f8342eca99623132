import random
from fractions import Fraction

import pytest

from helpers import poly, random_loop_problem
from pfaffian_tau.algebra import QQ, ConfigurationError, MatSeries, PolyRing
from pfaffian_tau.drinfeld_sokolov import example_problem
from pfaffian_tau.engines import (
    det,
    fredholm_pfaffian_truncated,
    pfaffian,
    pfaffian_tau,
    square_check,
    widom_tau,
)
from pfaffian_tau.kernels import build_a, build_d
from pfaffian_tau.lie import AlgebraSpec

F = Fraction


def random_antisymmetric(n, rng):
    M = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            M[i][j] = F(rng.randint(-9, 9), rng.randint(1, 6))
            M[j][i] = -M[i][j]
    return M


def leibniz_det(M):
    """Permutation-sum determinant, independent of the elimination code."""
    import itertools

    n = len(M)
    total = F(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = F(sign)
        for i in range(n):
            prod *= M[i][perm[i]]
        total += prod
    return total


class TestPfaffian:
    R = PolyRing([f"m{i}{j}" for i in range(1, 5) for j in range(i + 1, 5)])

    def test_two_by_two(self):
        c = self.R.gen("m12")
        assert pfaffian([[self.R.zero(), c], [-c, self.R.zero()]], self.R) == c

    def test_four_by_four(self):
        R = self.R
        m = lambda i, j: R.gen(f"m{i}{j}") if i < j else (-R.gen(f"m{j}{i}") if i > j else R.zero())
        M = [[m(i, j) for j in range(1, 5)] for i in range(1, 5)]
        expected = m(1, 2) * m(3, 4) - m(1, 3) * m(2, 4) + m(1, 4) * m(2, 3)
        assert pfaffian(M, R) == expected
        assert pfaffian(M, R) ** 2 == det(M, R)

    def test_square_equals_determinant(self):
        rng = random.Random(9)
        for k in range(200):
            n = 2 + k % 11  # sizes 2..12
            M = random_antisymmetric(n, rng)
            assert pfaffian(M, QQ) ** 2 == det(M, QQ)

    def test_determinant_against_leibniz(self):
        rng = random.Random(3)
        for n in range(1, 6):
            M = [[F(rng.randint(-5, 5)) for _ in range(n)] for _ in range(n)]
            assert det(M, QQ) == leibniz_det(M)

    def test_odd_size_is_zero(self):
        assert pfaffian(random_antisymmetric(5, random.Random(1)), QQ) == 0

    def test_asymmetric_matrix_raises(self):
        with pytest.raises(ConfigurationError):
            pfaffian([[F(0), F(1)], [F(1), F(0)]], QQ)

    def test_large_polynomial_pfaffian_matches_determinant(self):
        R = PolyRing(["x", "y"])
        x, y = R.gens()
        rng = random.Random(5)
        n = 10
        M = [[R.zero()] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                M[i][j] = x * rng.randint(-2, 2) + y * rng.randint(-2, 2) + rng.randint(-3, 3)
                M[j][i] = -M[i][j]
        assert pfaffian(M, R) ** 2 == det(M, R)


def trivial_kernels(N=3):
    ring = QQ
    a = build_a(MatSeries.identity(N, ring, kmax=4), 4)
    d = build_d(MatSeries.identity(N, ring))
    return a, d


class TestTau:
    def test_zero_d_gives_one(self):
        from pfaffian_tau.lie import build_algebra

        a, d = trivial_kernels()
        S = build_algebra(AlgebraSpec("B", 1)).S
        assert widom_tau(a, d, 4).value == 1
        assert widom_tau(a, d, 4, method="series").value == 1
        assert pfaffian_tau(a, d, S, 4).value == 1
        assert fredholm_pfaffian_truncated(a, d, S, 2) == 1
        assert square_check(a, d, S, 4)["agrees"]

    @pytest.mark.parametrize("name,expected", [("J1", "(1 - a*t1/4)**4"), ("J4", "(1 - a*t1/2)**2")])
    @pytest.mark.parametrize("method", ["minors", "series"])
    def test_widom_examples(self, name, expected, method):
        pb = example_problem(name)
        W = widom_tau(pb.a_kernel(6), pb.d_kernel(), 6, method=method)
        assert W.value == poly(expected, pb.ring)
        assert W.exact

    def test_widom_methods_agree_on_b2(self):
        pb = example_problem("J3")
        a, d = pb.a_kernel(4), pb.d_kernel()
        assert widom_tau(a, d, 4).value == widom_tau(a, d, 4, method="series").value

    def test_widom_ledger_sums_to_value(self):
        pb = example_problem("J1")
        a, d = pb.a_kernel(4), pb.d_kernel()
        W = widom_tau(a, d, 4, keep_terms=True)
        total = pb.ring.one()
        for (P, _Q), da, dd in W.terms:
            total = total - da * dd if len(P) % 2 else total + da * dd
        assert total == W.value

    def test_pfaffian_ledger_sums_to_value(self):
        pb = example_problem("J3")
        res = pb.tau()
        assert sum((pa * pd for _, pd, pa in res.terms[1:]), pb.ring.one()) == res.value
        assert all(lam.cardinality % 2 == 0 for lam, _, _ in res.terms)

    @pytest.mark.parametrize("name,M", [("J1", 2), ("J1", 3), ("J4", 1), ("J4", 2), ("J2", 2)])
    def test_fredholm_form_matches_expansion(self, name, M):
        pb = example_problem(name)
        tau = pb.tau()
        a = pb.a_kernel(2 * M)
        assert fredholm_pfaffian_truncated(a, pb.d_kernel(), pb.S, M) == tau.value

    def test_fredholm_rejects_bad_cutoff(self):
        pb = example_problem("J1")
        with pytest.raises(ConfigurationError):
            fredholm_pfaffian_truncated(pb.a_kernel(2), pb.d_kernel(), pb.S, 0)

    def test_antisymmetry_is_enforced(self):
        R = PolyRing(["e"])
        from pfaffian_tau.algebra import elementary, identity
        from pfaffian_tau.lie import build_algebra

        S = build_algebra(AlgebraSpec("B", 1)).S
        psi = MatSeries(R, 3, {0: identity(3, R), 1: elementary(3, 1, 1, R, R.gen("e"))}, 0, 4)
        with pytest.raises(ConfigurationError):
            pfaffian_tau(build_a(psi, 4), build_d(MatSeries.identity(3, R)), S, 2)

    def test_truncated_tau_is_flagged(self):
        res = example_problem("J3").tau(2)
        assert not res.exact
        assert example_problem("J3").tau().exact


@pytest.mark.parametrize("name", ["J1", "J2", "J3", "J4"])
def test_square_relation_on_examples(name):
    pb = example_problem(name)
    rep = square_check(pb.a_kernel(6), pb.d_kernel(), pb.S, 6, method="series")
    assert rep["agrees"]
    assert rep["difference"] == pb.ring.zero()


@pytest.mark.parametrize("series,rank", [("B", 1), ("B", 2)])
def test_square_relation_on_random_data_by_minors(series, rank):
    pb = random_loop_problem(AlgebraSpec(series, rank), random.Random(100 + rank), times=(1, 3))
    pb.validate()
    assert square_check(pb.a_kernel(5), pb.d_kernel(), pb.S, 5)["agrees"]
