from fractions import Fraction

import pytest

from dergeo.errors import InvariantViolation
from dergeo.polynomial import (
    Polynomial,
    monomials_up_to,
    parse_polynomial,
    parse_rational,
    poly_to_string,
)


def P(text, nvars):
    return parse_polynomial(text, nvars)


class TestArithmetic:
    def test_add_mul(self):
        x = Polynomial.variable(2, 0)
        y = Polynomial.variable(2, 1)
        p = (x + y) * (x - y)
        assert p == x * x - y * y

    def test_zero_coefficients_dropped(self):
        x = Polynomial.variable(1, 0)
        assert (x - x).coeffs == {}

    def test_pow(self):
        x = Polynomial.variable(1, 0)
        assert (x + 1) ** 3 == x ** 3 + 3 * x ** 2 + 3 * x + 1

    def test_evaluate_exact(self):
        p = P("1/2 x0^2 + x0x1", 2)
        assert p.evaluate([Fraction(1, 3), 2]) == Fraction(1, 18) + Fraction(2, 3)

    def test_partial(self):
        p = P("x0^2 x1 + 3x1", 2)
        assert p.partial(0) == P("2x0x1", 2)
        assert p.partial(1) == P("x0^2 + 3", 2)

    def test_compose(self):
        p = P("x0^2", 1)
        q = P("x0 + x1", 2)
        assert p.compose([q]) == P("x0^2 + 2x0x1 + x1^2", 2)

    def test_compose_truncated(self):
        p = P("x0^3", 1)
        q = P("x0 + x0^2", 1)
        full = p.compose([q])
        trunc = p.compose([q], max_degree=4)
        assert trunc == full.truncate(4)

    def test_shift(self):
        p = P("x0^2", 1)
        assert p.shift([1]) == P("1 + 2x0 + x0^2", 1)

    def test_arity_mismatch(self):
        with pytest.raises(InvariantViolation):
            Polynomial.variable(1, 0) + Polynomial.variable(2, 0)

    def test_zero_variable_polynomials(self):
        c = Polynomial.constant(0, 5)
        assert c.evaluate([]) == 5
        assert (c * c).evaluate([]) == 25


class TestParser:
    def test_rational_coefficient(self):
        p = P("3/2x0", 1)
        assert p.coeffs == {(1,): Fraction(3, 2)}

    def test_implicit_multiplication(self):
        assert P("2x0^2x1", 2) == 2 * Polynomial.variable(2, 0) ** 2 * Polynomial.variable(2, 1)

    def test_parentheses_and_minus(self):
        assert P("(x0 - 1)(x0 + 1)", 1) == P("x0^2 - 1", 1)
        assert P("-x0 + x0", 1).is_zero()

    def test_variable_out_of_range(self):
        with pytest.raises(InvariantViolation):
            P("x2", 2)

    def test_trailing_junk(self):
        with pytest.raises(InvariantViolation):
            P("x0 +", 1)

    def test_roundtrip_through_string(self):
        p = P("1/2 - 2x0 + x0^2x1^3", 2)
        assert parse_polynomial(poly_to_string(p), 2) == p

    def test_parse_rational(self):
        assert parse_rational("3/4") == Fraction(3, 4)
        assert parse_rational(-2) == Fraction(-2)


class TestMonomials:
    def test_counts_match_binomials(self):
        from math import comb

        for nvars in range(4):
            for deg in range(5):
                assert len(monomials_up_to(nvars, deg)) == comb(nvars + deg, deg)

    def test_ordering_canonical(self):
        ms = monomials_up_to(2, 2)
        assert ms[0] == (0, 0)
        assert sorted(ms, key=lambda m: (sum(m), m)) == ms
