import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permlab import (
    DimensionMismatch,
    EmptySupport,
    FlowMatrix,
    InputFormat,
    Permutation,
    RationalMatrix,
    enumerate_flow_matrices,
    kron_uniform,
    support,
    valid_permutations,
)
from permlab.core import (
    has_valid_permutation,
    matrix_from_json_obj,
    matrix_to_json_obj,
    to_fraction,
)

EXAMPLE1 = RationalMatrix.from_rows(
    [
        ["1", "0", "0", "0"],
        ["0", "0", "1", "0"],
        ["0", "1/3", "0", "2/3"],
        ["0", "2/3", "0", "1/3"],
    ]
)


def brute_valid_permutations(theta):
    n = theta.n
    out = []
    for images in itertools.permutations(range(n)):
        if all(theta.rows[i][images[i]] > 0 for i in range(n)):
            out.append(images)
    return out


class TestScalars:
    def test_to_fraction_forms(self):
        assert to_fraction(3) == 3
        assert to_fraction("3/7") == Fraction(3, 7)
        assert to_fraction("0.25") == Fraction(1, 4)
        assert to_fraction(0.5) == Fraction(1, 2)
        assert to_fraction(0.1) == Fraction(1, 10)  # shortest decimal, not binary

    def test_to_fraction_rejects(self):
        with pytest.raises(InputFormat):
            to_fraction("abc")
        with pytest.raises(InputFormat):
            to_fraction(True)
        with pytest.raises(InputFormat):
            to_fraction("1/0")


class TestRationalMatrix:
    def test_validation(self):
        with pytest.raises(InputFormat):
            RationalMatrix.from_rows([[1, 2], [3]])
        with pytest.raises(InputFormat):
            RationalMatrix.from_rows([[1, -2], [3, 4]])
        with pytest.raises(InputFormat):
            RationalMatrix.from_rows([])

    def test_helpers(self):
        m = RationalMatrix.from_rows([[1, 2], [3, 4]])
        assert m.row_sums() == (3, 7)
        assert m.col_sums() == (4, 6)
        assert m.scaled(Fraction(1, 2)).rows[1][1] == 2
        assert m.submatrix([1], [0]).rows == ((Fraction(3),),)

    def test_json_round_trip(self):
        obj = {"n": 2, "entries": [["1/3", 2], [0, "0.5"]]}
        m = matrix_from_json_obj(obj)
        assert m.rows[0][0] == Fraction(1, 3)
        assert m.rows[1][1] == Fraction(1, 2)
        again = matrix_from_json_obj(matrix_to_json_obj(m))
        assert again == m

    def test_json_bad_n(self):
        with pytest.raises(InputFormat):
            matrix_from_json_obj({"n": 3, "entries": [[1, 0], [0, 1]]})
        with pytest.raises(InputFormat):
            matrix_from_json_obj({"entries": "nope"})


class TestPermutation:
    def test_validation(self):
        with pytest.raises(InputFormat):
            Permutation((0, 0, 1))

    def test_compose_inverse(self):
        p = Permutation((1, 2, 0))
        assert p.after(p.inverse()) == Permutation.identity(3)
        assert p.inverse().images == (2, 0, 1)

    def test_matrix_view(self):
        rows = Permutation((1, 0)).matrix_rows()
        assert rows == ((0, 1), (1, 0))
        for row in rows:
            assert sum(row) == 1


class TestFlowMatrix:
    def test_sums_enforced(self):
        with pytest.raises(InputFormat):
            FlowMatrix(2, ((2, 0), (1, 1)))
        with pytest.raises(InputFormat):
            FlowMatrix(2, ((2, 0), (2, 0)))
        FlowMatrix(2, ((2, 0), (0, 2)))
        FlowMatrix(2, ((1, 1), (1, 1)))

    def test_from_gamma_requires_multiples(self):
        g = RationalMatrix.from_rows([["1/3", "2/3"], ["2/3", "1/3"]])
        T = FlowMatrix.from_gamma(g, 3)
        assert T.counts == ((1, 2), (2, 1))
        with pytest.raises(InputFormat):
            FlowMatrix.from_gamma(g, 2)

    def test_m1_is_permutation_matrix(self):
        for T in enumerate_flow_matrices(3, 1):
            for row in T.counts:
                assert sorted(row) == [0, 0, 1]

    def test_key_recovers_identity(self):
        a = FlowMatrix(2, ((1, 1), (1, 1)))
        b = FlowMatrix(2, ((2, 0), (0, 2)))
        assert a.key() != b.key()


class TestSupport:
    def test_identity(self):
        mask = support(RationalMatrix.identity(3)).mask
        assert all(mask[i][j] == (i == j) for i in range(3) for j in range(3))

    def test_all_ones(self):
        mask = support(RationalMatrix.ones(2)).mask
        assert all(all(row) for row in mask)

    def test_mixed(self):
        mask = support(RationalMatrix.from_rows([[1, 0], [2, 3]])).mask
        assert mask == ((True, False), (True, True))


class TestValidPermutations:
    def test_identity_only(self):
        perms = valid_permutations(RationalMatrix.identity(3))
        assert [p.images for p in perms] == [(0, 1, 2)]

    def test_all_ones_two(self):
        perms = valid_permutations(RationalMatrix.ones(2))
        assert [p.images for p in perms] == [(0, 1), (1, 0)]

    def test_example1_matches_brute_force(self):
        perms = valid_permutations(EXAMPLE1)
        assert [p.images for p in perms] == brute_valid_permutations(EXAMPLE1)
        # sigma(0)=0 and sigma(1)=2 forced, rows 2,3 pair up columns {1,3}
        assert [p.images for p in perms] == [(0, 2, 1, 3), (0, 2, 3, 1)]

    def test_empty_support_raises(self):
        with pytest.raises(EmptySupport):
            valid_permutations(RationalMatrix.from_rows([[1, 0], [1, 0]]))
        assert not has_valid_permutation(RationalMatrix.from_rows([[1, 0], [1, 0]]))

    def test_lexicographic_order(self):
        perms = valid_permutations(RationalMatrix.ones(3))
        images = [p.images for p in perms]
        assert images == sorted(images)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 4), st.randoms(use_true_random=False))
    def test_matches_brute_force_random(self, n, rnd):
        rows = [
            [Fraction(rnd.randint(0, 4)) for _ in range(n)] for _ in range(n)
        ]
        theta = RationalMatrix.from_rows(rows)
        expected = brute_valid_permutations(theta)
        if not expected:
            with pytest.raises(EmptySupport):
                valid_permutations(theta)
            assert not has_valid_permutation(theta)
        else:
            assert [p.images for p in valid_permutations(theta)] == expected
            assert has_valid_permutation(theta)


def brute_flow_matrices(n, M):
    out = []
    for values in itertools.product(range(M + 1), repeat=n * n):
        grid = [values[i * n : (i + 1) * n] for i in range(n)]
        if all(sum(r) == M for r in grid) and all(
            sum(grid[i][j] for i in range(n)) == M for j in range(n)
        ):
            out.append(tuple(grid))
    return out


class TestEnumerateFlowMatrices:
    def test_m1_gives_permutation_matrices(self):
        flows = enumerate_flow_matrices(3, 1)
        assert len(flows) == 6

    def test_n3_m2_count_vs_brute(self):
        flows = enumerate_flow_matrices(3, 2)
        brute = brute_flow_matrices(3, 2)
        assert len(flows) == 21
        assert sorted(T.counts for T in flows) == sorted(brute)

    @pytest.mark.parametrize("M", [1, 2, 3, 4, 7])
    def test_n2_family(self, M):
        flows = enumerate_flow_matrices(2, M)
        assert len(flows) == M + 1
        for T in flows:
            k1 = T.counts[0][0]
            assert T.counts == ((k1, M - k1), (M - k1, k1))

    def test_support_restriction(self):
        theta = RationalMatrix.from_rows([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        flows = enumerate_flow_matrices(3, 2, support(theta))
        mask = support(theta).mask
        brute = [
            g
            for g in brute_flow_matrices(3, 2)
            if all(g[i][j] == 0 or mask[i][j] for i in range(3) for j in range(3))
        ]
        assert sorted(T.counts for T in flows) == sorted(brute)

    def test_infeasible_support_empty(self):
        theta = RationalMatrix.from_rows([[1, 0], [1, 0]])
        assert enumerate_flow_matrices(2, 2, support(theta)) == ()

    def test_deterministic_order(self):
        assert enumerate_flow_matrices(3, 2) == enumerate_flow_matrices(3, 2)

    def test_row_col_sums_invariant(self):
        for T in enumerate_flow_matrices(3, 3):
            assert all(sum(row) == 3 for row in T.counts)
            assert all(sum(T.counts[i][j] for i in range(3)) == 3 for j in range(3))


class TestKronUniform:
    def test_m1_identity_case(self):
        m = RationalMatrix.from_rows([[1, 2], [3, 4]])
        assert kron_uniform(m, 1) == m

    def test_all_ones(self):
        big = kron_uniform(RationalMatrix.ones(2), 2)
        assert big.n == 4
        assert all(x == Fraction(1, 2) for row in big.rows for x in row)

    def test_blocks(self):
        big = kron_uniform(RationalMatrix.from_rows([[1, 2], [3, 4]]), 2)
        assert big.rows[0][:2] == (Fraction(1, 2), Fraction(1, 2))
        assert big.rows[3][2:] == (Fraction(2), Fraction(2))

    def test_row_sums_preserved(self):
        rng = random.Random(5)
        m = RationalMatrix.from_rows(
            [[Fraction(rng.randint(0, 5), rng.randint(1, 3)) for _ in range(3)] for _ in range(3)]
        )
        big = kron_uniform(m, 3)
        original = m.row_sums()
        for i, s in enumerate(big.row_sums()):
            assert s == original[i // 3]


def test_dimension_mismatch_on_support():
    with pytest.raises(DimensionMismatch):
        enumerate_flow_matrices(3, 1, support(RationalMatrix.ones(2)))


def test_flow_key_handles_wide_counts():
    small = FlowMatrix(1, ((1,),))
    wide = FlowMatrix(300, ((300,),))
    assert small.key() != wide.key()
    a = FlowMatrix(300, ((200, 100), (100, 200)))
    b = FlowMatrix(300, ((100, 200), (200, 100)))
    assert a.key() != b.key()


def test_degenerate_n1_everywhere():
    one = RationalMatrix.from_rows([["5/2"]])
    assert [p.images for p in valid_permutations(one)] == [(0,)]
    flows = enumerate_flow_matrices(1, 4)
    assert [T.counts for T in flows] == [((4,),)]
    assert kron_uniform(one, 3).n == 3
