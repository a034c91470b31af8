import random
from fractions import Fraction
from math import comb

import pytest

from dergeo.errors import InvariantViolation
from dergeo.linalg import in_column_space, rank
from dergeo.polynomial import Polynomial, monomials_up_to, parse_polynomial
from dergeo.qsmooth import (
    CospanPresentation,
    JetAlgebra,
    PolynomialMap,
    RationalPoint,
    delta1_face_rule_check,
    delta1_simplex_maps,
    diagonal_point,
    diagonal_representation,
    hochschild_degeneracy,
    hochschild_differential,
    hochschild_face,
    hochschild_level,
    is_transverse,
    jacobian,
    jet_mapping_complex,
    koszul_betti,
    mapping_space_betti,
    nerve_chains,
    nerve_cosimplicial_betti,
    pl_retraction,
    pl_retraction_check,
    point_cospan,
    product_cospan,
    product_point,
    tangent_complex,
    tangent_homology,
    virtual_dimension,
)


def P(text, nvars):
    return parse_polynomial(text, nvars)


def axes_cospan():
    x_axis = PolynomialMap(1, 2, [P("x0", 1), Polynomial.constant(1, 0)])
    y_axis = PolynomialMap(1, 2, [Polynomial.constant(1, 0), P("x0", 1)])
    return CospanPresentation(x_axis, y_axis)


def square_cospan():
    return CospanPresentation(
        PolynomialMap(1, 1, [P("x0^2", 1)]),
        PolynomialMap(0, 1, [Polynomial.constant(0, 0)]),
    )


class TestJacobian:
    def test_square_at_zero(self):
        f = PolynomialMap(1, 1, [P("x0^2", 1)])
        assert jacobian(f, [0]) == ((Fraction(0),),)

    def test_identity(self):
        f = PolynomialMap(2, 2, [P("x0", 2), P("x1", 2)])
        assert jacobian(f, [Fraction(3, 2), -1]) == (
            (Fraction(1), Fraction(0)),
            (Fraction(0), Fraction(1)),
        )

    def test_product_and_sum(self):
        f = PolynomialMap(2, 2, [P("x0x1", 2), P("x0 + x1", 2)])
        assert jacobian(f, [1, 2]) == (
            (Fraction(2), Fraction(1)),
            (Fraction(1), Fraction(1)),
        )


class TestTangentComplex:
    def test_axes_reduced_point(self):
        c = axes_cospan()
        p = RationalPoint(c, [0], [0])
        complex_ = tangent_complex(c, p)
        assert complex_.boundaries[0] == ((1, -1), (0, 0)) or rank(
            complex_.boundaries[0]
        ) == 2
        assert tangent_homology(c, p) == (0, 0)

    def test_point_times_point_over_line(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        complex_ = tangent_complex(c, p)
        assert complex_.dims == (1, 0)
        assert tangent_homology(c, p) == (0, 1)

    def test_square_cospan_homology(self):
        c = square_cospan()
        p = RationalPoint(c, [0], [])
        complex_ = tangent_complex(c, p)
        assert complex_.boundaries[0] == ((Fraction(0),),)
        assert tangent_homology(c, p) == (1, 1)

    def test_point_off_intersection_rejected(self):
        with pytest.raises(InvariantViolation):
            RationalPoint(square_cospan(), [1], [])


class TestVirtualDimension:
    def test_square_cospan_zero(self):
        assert virtual_dimension(square_cospan()) == 0

    def test_point_times_point(self):
        assert virtual_dimension(point_cospan()) == -1

    def test_product_additivity(self):
        c1, c2 = square_cospan(), axes_cospan()
        assert virtual_dimension(product_cospan(c1, c2)) == virtual_dimension(
            c1
        ) + virtual_dimension(c2)

    def test_euler_characteristic_matches(self):
        c = axes_cospan()
        # (1/2, 0) is not on the intersection: the legs disagree in the target
        with pytest.raises(InvariantViolation):
            RationalPoint(c, [Fraction(1, 2)], [Fraction(0)])
        p = RationalPoint(c, [0], [0])
        h0, h1 = tangent_homology(c, p)
        assert h0 - h1 == virtual_dimension(c)


class TestTransversality:
    def test_axes_transverse(self):
        c = axes_cospan()
        assert is_transverse(c, RationalPoint(c, [0], [0]))

    def test_square_not_transverse(self):
        c = square_cospan()
        assert not is_transverse(c, RationalPoint(c, [0], []))

    def test_parabola_vs_axis_lines(self):
        # rank oracle: the parabola is tangent to the x-axis at the origin
        # (both differentials span the same line), so NOT transverse; the
        # y-axis companion is transverse.
        parabola = PolynomialMap(1, 2, [P("x0", 1), P("x0^2", 1)])
        x_axis = PolynomialMap(1, 2, [P("x0", 1), Polynomial.constant(1, 0)])
        y_axis = PolynomialMap(1, 2, [Polynomial.constant(1, 0), P("x0", 1)])
        c1 = CospanPresentation(parabola, x_axis)
        p1 = RationalPoint(c1, [0], [0])
        assert rank(tangent_complex(c1, p1).boundaries[0]) == 1
        assert not is_transverse(c1, p1)
        c2 = CospanPresentation(parabola, y_axis)
        p2 = RationalPoint(c2, [0], [0])
        assert rank(tangent_complex(c2, p2).boundaries[0]) == 2
        assert is_transverse(c2, p2)

    def test_concentration_iff_transverse(self):
        for c, p in [
            (axes_cospan(), RationalPoint(axes_cospan(), [0], [0])),
            (square_cospan(), RationalPoint(square_cospan(), [0], [])),
        ]:
            assert is_transverse(c, p) == (tangent_homology(c, p)[1] == 0)


class TestDiagonalRepresentation:
    def test_vdim_preserved(self):
        for c in (axes_cospan(), square_cospan(), point_cospan()):
            assert virtual_dimension(diagonal_representation(c)) == virtual_dimension(c)

    def test_axes_verdicts_match(self):
        c = axes_cospan()
        p = RationalPoint(c, [0], [0])
        d = diagonal_representation(c)
        dp = diagonal_point(c, p)
        assert is_transverse(d, dp) == is_transverse(c, p)
        assert tangent_homology(d, dp) == tangent_homology(c, p)

    def test_square_homology_matches(self):
        c = square_cospan()
        p = RationalPoint(c, [0], [])
        assert tangent_homology(diagonal_representation(c), diagonal_point(c, p)) == (1, 1)


class TestHochschild:
    def test_level_descriptor(self):
        c = axes_cospan()
        lvl = hochschild_level(c, 1)
        assert lvl.nvars == 1 + 2 + 1
        assert [b[0] for b in lvl.blocks] == ["x", "z1", "y"]
        # level 0 is the algebra on the X × Y variables alone
        assert hochschild_level(c, 0).nvars == 2
        assert hochschild_level(point_cospan(), 2).nvars == 2

    def test_example_faces(self):
        c = point_cospan()
        F = P("x0x1", 2)  # z1 * z2 at level 2
        assert hochschild_face(c, 1, 0, F).is_zero()
        assert hochschild_face(c, 1, 1, F) == P("x0^2", 1)
        assert hochschild_face(c, 1, 2, F).is_zero()

    def test_constant_faces(self):
        c = point_cospan()
        F = Polynomial.constant(2, Fraction(7, 3))
        for i in range(3):
            assert hochschild_face(c, 1, i, F) == Polynomial.constant(1, Fraction(7, 3))

    def test_identity_spot_value(self):
        c = point_cospan()
        F = P("x0x1^2", 2)
        lhs = hochschild_face(c, 0, 0, hochschild_face(c, 1, 2, F))
        rhs = hochschild_face(c, 0, 1, hochschild_face(c, 1, 0, F))
        assert lhs == rhs  # d0 d2 = d1 d0

    def test_differential_example(self):
        c = point_cospan()
        assert hochschild_differential(c, 1, P("x0x1", 2)) == P("-x0^2", 1)

    def test_differential_level_one(self):
        c = point_cospan()
        assert hochschild_differential(c, 0, P("x0^2", 1)).is_zero()

    def test_dd_zero_random(self):
        rng = random.Random(3)
        c = axes_cospan()
        lvl3 = hochschild_level(c, 3).nvars
        for _ in range(5):
            coeffs = {}
            for _ in range(4):
                mono = tuple(rng.randint(0, 1) for _ in range(lvl3))
                if sum(mono) <= 3:
                    coeffs[mono] = Fraction(rng.randint(-3, 3))
            F = Polynomial(lvl3, coeffs)
            dF = hochschild_differential(c, 2, F)
            assert hochschild_differential(c, 1, dF).is_zero()

    def test_symbolic_identities_on_generators(self):
        for c in (point_cospan(), axes_cospan()):
            for n in range(0, 3):
                nv = hochschild_level(c, n + 2).nvars
                gens = [Polynomial.variable(nv, k) for k in range(nv)]
                for j in range(n + 3):
                    for i in range(j):
                        for g in gens:
                            lhs = hochschild_face(c, n, i, hochschild_face(c, n + 1, j, g))
                            rhs = hochschild_face(
                                c, n, j - 1, hochschild_face(c, n + 1, i, g)
                            )
                            assert lhs == rhs
            # mixed face/degeneracy identities: d_i s_j on level-n generators
            for n in range(0, 2):
                nv_n = hochschild_level(c, n).nvars
                gens_n = [Polynomial.variable(nv_n, k) for k in range(nv_n)]
                for j in range(n + 1):
                    for i in range(n + 2):
                        for g in gens_n:
                            lhs = hochschild_face(c, n, i, hochschild_degeneracy(c, n, j, g))
                            if i == j or i == j + 1:
                                rhs = g
                            elif i < j:
                                rhs = hochschild_degeneracy(
                                    c, n - 1, j - 1, hochschild_face(c, n - 1, i, g)
                                )
                            else:
                                rhs = hochschild_degeneracy(
                                    c, n - 1, j, hochschild_face(c, n - 1, i - 1, g)
                                )
                            assert lhs == rhs


class TestJetComplex:
    def test_dimension_counting_oracle(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        for N in (1, 2, 3):
            sv = jet_mapping_complex(c, p, N, 3, 1)
            for n in range(3):
                nvars = n  # a = b = 0, c = 1
                assert sv.dims[n] == len(monomials_up_to(nvars, N)) == comb(n + N, N)

    def test_target_dimension_multiplies(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        s1 = jet_mapping_complex(c, p, 2, 3, 1)
        s2 = jet_mapping_complex(c, p, 2, 3, 2)
        assert tuple(2 * d for d in s1.dims) == s2.dims

    def test_identities_hold_as_matrices(self):
        c = axes_cospan()
        p = RationalPoint(c, [0], [0])
        sv = jet_mapping_complex(c, p, 2, 3, 1, validate=False)
        assert sv.validate()

    def test_jet_algebra_truncation(self):
        alg = JetAlgebra(2, 2)
        u = alg.jet_of(P("x0 + x1^2", 2), [0, 0])
        v = alg.jet_of(P("x0", 2), [0, 0])
        prod = alg.multiply(u, v)
        # x0^2 survives, x0*x1^2 is cut at order 2
        expect = alg.jet_of(P("x0^2", 2), [0, 0])
        assert prod == expect


class TestMappingBetti:
    def test_example_values(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        assert mapping_space_betti(c, p, 2, 3, 1) == [1, 1, 0]
        # the top entry is informational (truncation artifact), so only
        # degrees 0 and 1 are pinned
        assert mapping_space_betti(c, p, 3, 3, 3)[:2] == [3, 3]

    def test_transverse_axes_no_derived_loop(self):
        c = axes_cospan()
        p = RationalPoint(c, [0], [0])
        betti = mapping_space_betti(c, p, 2, 3, 1)
        assert betti[0] == 1 and betti[1] == 0

    def test_jet_stabilization(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        for N in (2, 3, 4, 5):
            b = mapping_space_betti(c, p, N, 3, 1)
            assert (b[0], b[1]) == (1, 1)
        for L in (3, 4):
            b = mapping_space_betti(c, p, 2, L, 1)
            assert (b[0], b[1]) == (1, 1)

    def test_normalized_agrees_with_moore_complex(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        sv = jet_mapping_complex(c, p, 2, 3, 1)
        assert sv.betti_numbers()[:2] == sv.unnormalized_betti()[:2]

    def test_derivative_characterization(self):
        # the image of the normalized level-2 differential is exactly the
        # jets with vanishing linear coefficient
        c = point_cospan()
        p = RationalPoint(c, [], [])
        for N in (2, 3):
            sv = jet_mapping_complex(c, p, N, 3, 1)
            dims, boundaries, bases = sv.normalized_complex()
            n1_matrix = tuple(
                tuple(vec[r] for vec in bases[1]) for r in range(sv.dims[1])
            )
            image_matrix = boundaries[1]
            # jets are coefficient vectors against monomials 1, z, z^2, ...
            for k in range(1, N + 1):
                jet = [Fraction(0)] * sv.dims[1]
                jet[k] = Fraction(1)
                from dergeo.linalg import solve

                coords = solve(n1_matrix, jet)
                assert coords is not None  # z^k has no constant term
                assert in_column_space(image_matrix, coords) == (k >= 2)


class TestKoszul:
    def test_values(self):
        assert koszul_betti(0) == [1]
        assert koszul_betti(1) == [1, 1]
        assert koszul_betti(2) == [1, 2, 1]

    def test_matches_mapping_betti_through_level_two(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        betti = mapping_space_betti(c, p, 2, 3, 1)
        koszul = koszul_betti(1) + [0]
        assert betti[:3] == koszul[:3]

    def test_codimension_two_matches_exterior_algebra(self):
        # pt over R^2: homology (1, 2, 1) = graded dims of the exterior
        # algebra on the 2-dimensional normal space (computed value is
        # stable for N = 2 and 3)
        zero2 = PolynomialMap(
            0, 2, [Polynomial.constant(0, 0), Polynomial.constant(0, 0)]
        )
        c = CospanPresentation(zero2, zero2)
        p = RationalPoint(c, [], [])
        assert mapping_space_betti(c, p, 2, 4, 1)[:3] == koszul_betti(2)


class TestNerve:
    def test_partition_counts(self):
        for n in range(5):
            assert len(delta1_simplex_maps(n)) == n + 2

    def test_face_rule(self):
        for n in range(4):
            for i in range(n + 2):
                assert delta1_face_rule_check(n, i)

    def test_chain_counts(self):
        for n in range(4):
            assert len(nerve_chains(n)) == 2 * n + 3

    def test_agreement_with_hochschild_model(self):
        c = point_cospan()
        p = RationalPoint(c, [], [])
        nerve = nerve_cosimplicial_betti(c, p, 2, 3, 1)
        hoch = mapping_space_betti(c, p, 2, 3, 1)
        assert nerve[:2] == hoch[:2] == [1, 1]

    def test_agreement_on_other_cospans(self):
        # the two resolutions have different level spaces, so agreement is
        # a real cross-check, not a tautology
        c = axes_cospan()
        p = RationalPoint(c, [0], [0])
        assert nerve_cosimplicial_betti(c, p, 2, 3, 1)[:2] == mapping_space_betti(
            c, p, 2, 3, 1
        )[:2] == [1, 0]
        c = square_cospan()
        p = RationalPoint(c, [0], [])
        nerve = nerve_cosimplicial_betti(c, p, 2, 3, 1)
        hoch = mapping_space_betti(c, p, 2, 3, 1)
        # double point: a map carries a value and a first-order coefficient,
        # and one derived loop from the single relation (Koszul: codim 1)
        assert nerve[:2] == hoch[:2] == [2, 1]

    def test_nerve_identities(self):
        from dergeo.qsmooth import nerve_jet_complex

        c = point_cospan()
        p = RationalPoint(c, [], [])
        assert nerve_jet_complex(c, p, 2, 3, 1, validate=False).validate()


class TestPLRetraction:
    def test_region_values(self):
        assert pl_retraction(Fraction(2), Fraction(3)) == 2
        assert pl_retraction(Fraction(-2), Fraction(-3)) == -2
        assert pl_retraction(Fraction(1), Fraction(-1)) == 0

    def test_report(self):
        rep = pl_retraction_check(Fraction(5), 101)
        assert rep.verdict
        assert rep.grid_points == 101 * 101
        assert rep.derivative_witness["mismatch"]
        assert rep.derivative_witness["right_quotient"] == "-1"
        assert rep.derivative_witness["left_quotient"] == "1"


class TestProductCospans:
    def test_tangent_complexes_direct_sum(self):
        c1 = square_cospan()
        p1 = RationalPoint(c1, [0], [])
        c2 = axes_cospan()
        p2 = RationalPoint(c2, [0], [0])
        cp = product_cospan(c1, c2)
        pp = product_point(cp, p1, p2)
        h1 = tangent_homology(c1, p1)
        h2 = tangent_homology(c2, p2)
        hp = tangent_homology(cp, pp)
        assert hp == (h1[0] + h2[0], h1[1] + h2[1])
