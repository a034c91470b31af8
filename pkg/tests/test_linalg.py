import random
from fractions import Fraction

import pytest

from dergeo.errors import InvariantViolation
from dergeo.linalg import (
    ChainComplex,
    column_stack,
    identity_matrix,
    in_column_space,
    mat_mul,
    matrix,
    nullspace,
    rank,
    rref,
    solve,
    zero_matrix,
)


def brute_rank(a):
    """Independent oracle: largest size of a combination with nonzero det,
    via expansion on small matrices only."""

    def det(rows, cols, m):
        if not rows:
            return Fraction(1)
        r = rows[0]
        total = Fraction(0)
        for k, c in enumerate(cols):
            if m[r][c]:
                sub = det(rows[1:], cols[:k] + cols[k + 1 :], m)
                total += (-1) ** k * m[r][c] * sub
        return total

    from itertools import combinations

    n, m_ = len(a), len(a[0]) if a else 0
    for size in range(min(n, m_), 0, -1):
        for rows in combinations(range(n), size):
            for cols in combinations(range(m_), size):
                if det(list(rows), list(cols), a):
                    return size
    return 0


class TestRank:
    def test_identity(self):
        assert rank(identity_matrix(4)) == 4

    def test_zero(self):
        assert rank(zero_matrix(3, 5)) == 0

    def test_random_matches_brute_force(self):
        rng = random.Random(11)
        for _ in range(40):
            n = rng.randint(1, 4)
            m = rng.randint(1, 4)
            a = matrix(
                [
                    [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(m)]
                    for _ in range(n)
                ]
            )
            assert rank(a) == brute_rank(a)


class TestSolve:
    def test_consistent(self):
        a = matrix([[1, 2], [3, 4]])
        x = solve(a, [5, 11])
        assert x == (Fraction(1), Fraction(2))

    def test_inconsistent(self):
        a = matrix([[1, 1], [1, 1]])
        assert solve(a, [0, 1]) is None

    def test_underdetermined(self):
        a = matrix([[1, 1]])
        x = solve(a, [3])
        assert sum(x) == 3

    def test_column_space_membership(self):
        a = matrix([[1, 0], [0, 1], [1, 1]])
        assert in_column_space(a, [1, 2, 3])
        assert not in_column_space(a, [1, 2, 4])


class TestNullspace:
    def test_dimension(self):
        a = matrix([[1, 1, 0], [0, 0, 1]])
        basis = nullspace(a)
        assert len(basis) == 1
        for v in basis:
            assert all(not x for x in (sum(c * y for c, y in zip(row, v)) for row in a))

    def test_full_rank_trivial_kernel(self):
        assert nullspace(identity_matrix(3)) == []

    def test_zero_rows(self):
        assert len(nullspace((), ncols=2)) == 2


class TestChainComplex:
    def test_boundary_squared_enforced(self):
        d1 = matrix([[1]])
        d2 = matrix([[1]])
        with pytest.raises(InvariantViolation) as e:
            ChainComplex([1, 1, 1], [d1, d2])
        assert e.value.invariant == "complex-boundary-squared"

    def test_circle_like_homology(self):
        # 0 → Q^2 → Q^2 → 0 with boundary of rank 1: H0 = H1 = 1
        d1 = matrix([[1, -1], [-1, 1]])
        c = ChainComplex([2, 2], [d1])
        assert c.homology_dimensions() == [1, 1]

    def test_exact_sequence(self):
        d1 = matrix([[1, 0], [0, 1]])
        c = ChainComplex([2, 2], [d1])
        assert c.homology_dimensions() == [0, 0]
