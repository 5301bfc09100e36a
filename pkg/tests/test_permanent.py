import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permlab import (
    EmptySupport,
    RationalMatrix,
    SizeGuard,
    SizeMismatch,
    enumerate_flow_matrices,
    kron_uniform,
    perm_brute,
    perm_distribution,
    perm_exact,
    perm_float,
    perm_rect,
)
from permlab.permanent import mth_root

from conftest import random_positive_matrix

EXAMPLE1 = RationalMatrix.from_rows(
    [
        ["1", "0", "0", "0"],
        ["0", "0", "1", "0"],
        ["0", "1/3", "0", "2/3"],
        ["0", "2/3", "0", "1/3"],
    ]
)


class TestPermExact:
    def test_identity(self):
        for n in (1, 2, 4):
            assert perm_exact(RationalMatrix.identity(n)) == 1

    def test_all_ones_is_factorial(self):
        for n in (1, 2, 3, 4, 5):
            assert perm_exact(RationalMatrix.ones(n)) == math.factorial(n)

    def test_two_by_two(self):
        assert perm_exact(RationalMatrix.from_rows([[1, 2], [3, 4]])) == 10

    def test_zero_permanent(self):
        assert perm_exact(RationalMatrix.from_rows([[1, 0], [1, 0]])) == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.randoms(use_true_random=False))
    def test_matches_brute_force(self, n, rnd):
        rows = [
            [Fraction(rnd.randint(0, 6), rnd.randint(1, 3)) for _ in range(n)]
            for _ in range(n)
        ]
        theta = RationalMatrix.from_rows(rows)
        assert perm_exact(theta) == perm_brute(theta)

    @pytest.mark.parametrize("n", [6, 7])
    def test_matches_brute_force_larger(self, n):
        rng = random.Random(n)
        theta = random_positive_matrix(n, rng)
        assert perm_exact(theta) == perm_brute(theta)

    def test_thread_paths_agree(self, monkeypatch):
        rng = random.Random(11)
        theta = random_positive_matrix(6, rng)
        serial = perm_exact(theta, threads=1)
        assert perm_exact(theta, threads=4) == serial
        monkeypatch.setenv("PERMLAB_THREADS", "3")
        assert perm_exact(theta) == serial
        monkeypatch.setenv("PERMLAB_THREADS", "0")  # auto
        assert perm_exact(theta) == serial

    def test_example1_scaled_integer(self):
        scaled = EXAMPLE1.scaled(3)
        assert perm_exact(scaled) == perm_brute(scaled)


class TestPermBrute:
    def test_guard(self):
        with pytest.raises(SizeGuard):
            perm_brute(RationalMatrix.identity(11))


class TestPermRect:
    def test_empty_sets_give_one(self):
        assert perm_rect(EXAMPLE1, [], []) == 1

    def test_example1_core_block(self):
        # rows {2,3} x cols {1,3} of the Example-1 matrix, oracle by hand:
        # perm([[1/3,2/3],[2/3,1/3]]) = 1/9 + 4/9
        sub = EXAMPLE1.submatrix([2, 3], [1, 3])
        by_hand = sub.rows[0][0] * sub.rows[1][1] + sub.rows[0][1] * sub.rows[1][0]
        assert by_hand == Fraction(5, 9)
        assert perm_rect(EXAMPLE1, [2, 3], [1, 3]) == Fraction(5, 9)

    def test_full_sets_match_perm(self):
        m = RationalMatrix.from_rows([[1, 2], [3, 4]])
        assert perm_rect(m, [0, 1], [0, 1]) == perm_exact(m)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            perm_rect(EXAMPLE1, [0], [0, 1])


class TestPermDistribution:
    def test_identity_single_atom(self):
        dist = perm_distribution(RationalMatrix.identity(3))
        assert len(dist.support) == 1
        assert dist.weights == (Fraction(1),)

    def test_all_ones_symmetric(self):
        dist = perm_distribution(RationalMatrix.ones(2))
        assert dist.weights == (Fraction(1, 2), Fraction(1, 2))

    def test_weighted(self):
        dist = perm_distribution(RationalMatrix.from_rows([[1, 2], [3, 4]]))
        assert dist.weights == (Fraction(4, 10), Fraction(6, 10))

    def test_weights_always_sum_to_one(self):
        rng = random.Random(2)
        for _ in range(10):
            theta = random_positive_matrix(4, rng)
            dist = perm_distribution(theta)
            assert sum(dist.weights, Fraction(0)) == 1

    def test_empty_support(self):
        with pytest.raises(EmptySupport):
            perm_distribution(RationalMatrix.from_rows([[0, 1], [0, 1]]))


class TestSandwich:
    @pytest.mark.parametrize("n,M", [(3, 2), (3, 3)])
    def test_doubly_stochastic_sandwich(self, n, M):
        lower = Fraction(math.factorial(n), n**n)
        for T in enumerate_flow_matrices(n, M):
            p = perm_exact(T.gamma())
            assert lower <= p <= 1

    def test_kron_positive(self):
        rng = random.Random(9)
        for _ in range(5):
            theta = random_positive_matrix(3, rng)
            assert perm_exact(theta) > 0
            assert perm_exact(kron_uniform(theta, 2)) > 0


class TestPermFloat:
    def test_matches_exact_small(self):
        rng = random.Random(17)
        for n in (2, 4, 6):
            theta = random_positive_matrix(n, rng)
            exact = float(perm_exact(theta))
            approx = perm_float(theta.to_floats())
            assert abs(approx - exact) <= 1e-9 * exact

    def test_deterministic(self):
        rng = random.Random(3)
        theta = random_positive_matrix(7, rng)
        assert perm_float(theta.to_floats()) == perm_float(theta.to_floats())


class TestMthRoot:
    def test_exact_roots(self):
        assert mth_root(Fraction(8), 3) == pytest.approx(2.0, rel=1e-15)
        assert mth_root(Fraction(1, 4), 2) == pytest.approx(0.5, rel=1e-15)
        assert mth_root(Fraction(0), 5) == 0.0

    def test_huge_fraction(self):
        big = Fraction(10**400, 3)
        assert mth_root(big, 100) == pytest.approx(math.exp((400 * math.log(10) - math.log(3)) / 100))
