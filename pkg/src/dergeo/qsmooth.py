"""Quasi-smooth derived intersections presented by polynomial cospans
over exact rationals: tangent complex, virtual dimension,
transversality, the Hochschild simplicial algebra with jet truncations,
Dold-Kan homology of mapping complexes, the nerve comparison, the
Koszul oracle, and the piecewise-linear retraction pathology check.

Cone convention: the tangent complex sits in degrees 0 and -1 with the
boundary (df | -dg) out of degree 0; its cokernel is H_{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .errors import BoundExceeded, InvariantViolation
from .linalg import (
    ChainComplex,
    Matrix,
    column_stack,
    identity_matrix,
    mat_mul,
    nullspace,
    rank,
    solve,
    zero_matrix,
)
from .polynomial import Polynomial, monomials_up_to

JET_DIMENSION_LIMIT = 4000


class PolynomialMap:
    """A polynomial map between affine spaces over the rationals."""

    __slots__ = ("source_dim", "target_dim", "components")

    def __init__(self, source_dim: int, target_dim: int, components: Sequence[Polynomial]):
        self.source_dim = source_dim
        self.target_dim = target_dim
        comps = tuple(components)
        if len(comps) != target_dim:
            raise InvariantViolation("map-component-count")
        for p in comps:
            if p.nvars != source_dim:
                raise InvariantViolation("map-component-arity")
        self.components = comps

    def __call__(self, point: Sequence) -> tuple:
        return tuple(p.evaluate(point) for p in self.components)


class CospanPresentation:
    """A pair of polynomial maps with a common target: X → Z ← Y."""

    __slots__ = ("left", "right")

    def __init__(self, left: PolynomialMap, right: PolynomialMap):
        if left.target_dim != right.target_dim:
            raise InvariantViolation("cospan-target-mismatch")
        self.left = left
        self.right = right

    @property
    def dims(self) -> tuple:
        return (self.left.source_dim, self.right.source_dim, self.left.target_dim)


class RationalPoint:
    """Coordinates in both legs that agree exactly in the target."""

    __slots__ = ("x", "y")

    def __init__(self, cospan: CospanPresentation, x: Sequence, y: Sequence):
        self.x = tuple(Fraction(v) for v in x)
        self.y = tuple(Fraction(v) for v in y)
        if len(self.x) != cospan.left.source_dim or len(self.y) != cospan.right.source_dim:
            raise InvariantViolation("point-arity")
        if cospan.left(self.x) != cospan.right(self.y):
            raise InvariantViolation("point-not-on-intersection")


def point_cospan() -> CospanPresentation:
    """pt → R ← pt, both legs hitting 0: the canonical loop-like example."""
    zero = PolynomialMap(0, 1, [Polynomial.constant(0, 0)])
    return CospanPresentation(zero, zero)


def jacobian(f: PolynomialMap, point: Sequence) -> Matrix:
    """Exact matrix of partial derivatives at the point."""
    point = [Fraction(v) for v in point]
    if len(point) != f.source_dim:
        raise InvariantViolation("jacobian-point-arity")
    return tuple(
        tuple(comp.partial(j).evaluate(point) for j in range(f.source_dim))
        for comp in f.components
    )


def tangent_complex(cospan: CospanPresentation, p: RationalPoint) -> ChainComplex:
    """Two-term complex Q^(a+b) → Q^c in degrees 0 and -1 with boundary
    (df_p | -dg_p)."""
    a, b, c = cospan.dims
    df = jacobian(cospan.left, p.x)
    dg = jacobian(cospan.right, p.y)
    boundary = tuple(
        tuple(df[i]) + tuple(-v for v in dg[i]) for i in range(c)
    )
    return ChainComplex([c, a + b], [boundary], degree_offset=-1)


def tangent_homology(cospan: CospanPresentation, p: RationalPoint) -> tuple:
    """(dim H_0, dim H_{-1}) of the tangent complex."""
    h = tangent_complex(cospan, p).homology_dimensions()
    return (h[1], h[0])


def virtual_dimension(cospan: CospanPresentation) -> int:
    a, b, c = cospan.dims
    return a + b - c


def is_transverse(cospan: CospanPresentation, p: RationalPoint) -> bool:
    """Joint surjectivity of the differentials: (df_p | -dg_p) has full
    row rank, equivalently the tangent complex concentrates in degree 0."""
    a, b, c = cospan.dims
    complex_ = tangent_complex(cospan, p)
    return rank(complex_.boundaries[0]) == c


def _embed(poly: Polynomial, total: int, offset: int) -> Polynomial:
    """View a polynomial in a block of a larger variable tuple."""
    out = {}
    for m, coeff in poly.coeffs.items():
        key = [0] * total
        for k, e in enumerate(m):
            key[offset + k] = e
        out[tuple(key)] = coeff
    return Polynomial(total, out)


def product_cospan(c1: CospanPresentation, c2: CospanPresentation) -> CospanPresentation:
    a1, b1, cc1 = c1.dims
    a2, b2, cc2 = c2.dims
    left = PolynomialMap(
        a1 + a2,
        cc1 + cc2,
        [_embed(p, a1 + a2, 0) for p in c1.left.components]
        + [_embed(p, a1 + a2, a1) for p in c2.left.components],
    )
    right = PolynomialMap(
        b1 + b2,
        cc1 + cc2,
        [_embed(p, b1 + b2, 0) for p in c1.right.components]
        + [_embed(p, b1 + b2, b1) for p in c2.right.components],
    )
    return CospanPresentation(left, right)


def product_point(cp: CospanPresentation, p1: RationalPoint, p2: RationalPoint) -> RationalPoint:
    return RationalPoint(cp, p1.x + p2.x, p1.y + p2.y)


def diagonal_representation(cospan: CospanPresentation) -> CospanPresentation:
    """The pullback presentation X×Y → Z×Z ← Z with the diagonal on the
    right; virtual dimension, transversality and tangent homology are
    preserved pointwise."""
    a, b, c = cospan.dims
    left = PolynomialMap(
        a + b,
        2 * c,
        [_embed(p, a + b, 0) for p in cospan.left.components]
        + [_embed(p, a + b, a) for p in cospan.right.components],
    )
    diag = PolynomialMap(
        c,
        2 * c,
        [Polynomial.variable(c, i) for i in range(c)] * 2,
    )
    return CospanPresentation(left, diag)


def diagonal_point(cospan: CospanPresentation, p: RationalPoint) -> RationalPoint:
    target = cospan.left(p.x)
    return RationalPoint(diagonal_representation(cospan), p.x + p.y, target)


# ---------------------------------------------------------------------------
# Hochschild simplicial algebra


@dataclass(frozen=True)
class HochschildLevel:
    """Variable-block descriptor of the level-n algebra: functions on
    X × Z^n × Y."""

    level: int
    x_dim: int
    z_dim: int
    y_dim: int

    @property
    def nvars(self) -> int:
        return self.x_dim + self.level * self.z_dim + self.y_dim

    @property
    def blocks(self) -> list:
        out = [("x", 0, self.x_dim)]
        for k in range(1, self.level + 1):
            out.append((f"z{k}", self.x_dim + (k - 1) * self.z_dim, self.z_dim))
        out.append(("y", self.x_dim + self.level * self.z_dim, self.y_dim))
        return out


def hochschild_level(cospan: CospanPresentation, n: int) -> HochschildLevel:
    if n < 0:
        raise InvariantViolation("hochschild-negative-level")
    a, b, c = cospan.dims
    return HochschildLevel(n, a, c, b)


def _hochschild_face_substitutions(cospan: CospanPresentation, n: int, i: int) -> list:
    """Polynomials (in the level-n variables) substituted for each
    level-(n+1) variable by the i-th face.

    d_0 feeds the left leg's image into the first middle block, d_{n+1}
    feeds the right leg's image into the last, and interior faces repeat
    a middle block.
    """
    a, b, c = cospan.dims
    if not 0 <= i <= n + 1:
        raise InvariantViolation("hochschild-face-index")
    total = a + n * c + b
    subs = [Polynomial.variable(total, k) for k in range(a)]
    for block in range(1, n + 2):
        if i == 0 and block == 1:
            subs.extend(_embed(p, total, 0) for p in cospan.left.components)
            continue
        if i == n + 1 and block == n + 1:
            subs.extend(_embed(p, total, a + n * c) for p in cospan.right.components)
            continue
        if i == 0:
            src = block - 1
        elif i == n + 1:
            src = block
        elif block <= i:
            src = block
        elif block == i + 1:
            src = i
        else:
            src = block - 1
        offset = a + (src - 1) * c
        subs.extend(Polynomial.variable(total, offset + k) for k in range(c))
    subs.extend(Polynomial.variable(total, a + n * c + k) for k in range(b))
    return subs


def hochschild_face(cospan: CospanPresentation, n: int, i: int, poly: Polynomial) -> Polynomial:
    """Apply the i-th face to a level-(n+1) element, landing at level n."""
    level = hochschild_level(cospan, n + 1)
    if poly.nvars != level.nvars:
        raise InvariantViolation(
            "hochschild-wrong-level", f"expected {level.nvars} variables, got {poly.nvars}"
        )
    a, b, c = cospan.dims
    return poly.compose(
        _hochschild_face_substitutions(cospan, n, i), arity=a + n * c + b
    )


def _hochschild_degeneracy_substitutions(cospan: CospanPresentation, n: int, j: int) -> list:
    a, b, c = cospan.dims
    if not 0 <= j <= n:
        raise InvariantViolation("hochschild-degeneracy-index")
    total = a + (n + 1) * c + b
    subs = [Polynomial.variable(total, k) for k in range(a)]
    for block in range(1, n + 1):
        src = block if block <= j else block + 1
        offset = a + (src - 1) * c
        subs.extend(Polynomial.variable(total, offset + k) for k in range(c))
    subs.extend(Polynomial.variable(total, a + (n + 1) * c + k) for k in range(b))
    return subs


def hochschild_degeneracy(cospan: CospanPresentation, n: int, j: int, poly: Polynomial) -> Polynomial:
    """Apply the j-th degeneracy to a level-n element, landing at level
    n+1 by skipping the (j+1)-st middle block."""
    level = hochschild_level(cospan, n)
    if poly.nvars != level.nvars:
        raise InvariantViolation("hochschild-wrong-level")
    a, b, c = cospan.dims
    return poly.compose(
        _hochschild_degeneracy_substitutions(cospan, n, j), arity=a + (n + 1) * c + b
    )


def hochschild_differential(cospan: CospanPresentation, n: int, poly: Polynomial) -> Polynomial:
    """Alternating face sum, level n+1 → level n; squares to zero."""
    total = Polynomial(hochschild_level(cospan, n).nvars)
    for i in range(n + 2):
        term = hochschild_face(cospan, n, i, poly)
        total = total + (term if i % 2 == 0 else -term)
    return total


# ---------------------------------------------------------------------------
# Jets


class JetAlgebra:
    """Truncated polynomial algebra: monomials of total degree <= order
    in a fixed number of variables; products beyond the order vanish."""

    __slots__ = ("nvars", "order", "monomials", "index")

    def __init__(self, nvars: int, order: int):
        if order < 0:
            raise InvariantViolation("jet-negative-order")
        self.nvars = nvars
        self.order = order
        self.monomials = tuple(monomials_up_to(nvars, order))
        self.index = {m: k for k, m in enumerate(self.monomials)}

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def jet_of(self, poly: Polynomial, base: Sequence) -> tuple:
        """Taylor coefficients of the polynomial at the base point, in
        canonical monomial order."""
        shifted = poly.shift(base).truncate(self.order)
        return tuple(shifted.coeffs.get(m, Fraction(0)) for m in self.monomials)

    def multiply(self, u: Sequence, v: Sequence) -> tuple:
        out = [Fraction(0)] * self.dim
        for m1, c1 in zip(self.monomials, u):
            if not c1:
                continue
            for m2, c2 in zip(self.monomials, v):
                if not c2:
                    continue
                m = tuple(a + b for a, b in zip(m1, m2))
                if sum(m) <= self.order:
                    out[self.index[m]] += c1 * c2
        return tuple(out)


def _jet_transfer_matrix(
    src: JetAlgebra,
    src_base: Sequence,
    tgt: JetAlgebra,
    tgt_base: Sequence,
    subs_actual: Sequence[Polynomial],
) -> Matrix:
    """Matrix of a substitution map between jet spaces.

    subs_actual gives each source coordinate as a polynomial in the
    target's actual coordinates; it must send the target base point to
    the source base point so that jets transform."""
    order = src.order
    v = []
    for k, s in enumerate(subs_actual):
        shifted = s.shift(tgt_base) - Fraction(src_base[k])
        shifted = shifted.truncate(order)
        if shifted.constant_term():
            raise InvariantViolation(
                "jet-base-point-mismatch", f"coordinate {k} does not preserve base points"
            )
        v.append(shifted)
    columns = []
    pow_cache: dict = {}

    def power_of(k, e):
        if (k, e) not in pow_cache:
            if e == 0:
                pow_cache[(k, e)] = Polynomial.constant(tgt.nvars, 1)
            else:
                pow_cache[(k, e)] = (power_of(k, e - 1) * v[k]).truncate(order)
        return pow_cache[(k, e)]

    for mono in src.monomials:
        term = Polynomial.constant(tgt.nvars, 1)
        for k, e in enumerate(mono):
            if e:
                term = (term * power_of(k, e)).truncate(order)
        columns.append(tuple(term.coeffs.get(m, Fraction(0)) for m in tgt.monomials))
    return tuple(tuple(col[r] for col in columns) for r in range(tgt.dim))


def _block_copies(mat: Matrix, copies: int) -> Matrix:
    """Block-diagonal sum of several copies (coordinatewise action on a
    vector-valued jet)."""
    if copies == 1:
        return mat
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    out = []
    for c in range(copies):
        for row in mat:
            full = [Fraction(0)] * (ncols * copies)
            full[c * ncols : (c + 1) * ncols] = list(row)
            out.append(tuple(full))
    return tuple(out)


class SimplicialVectorSpace:
    """Levels of rational vector spaces with face and degeneracy
    matrices obeying the simplicial identities exactly."""

    __slots__ = ("dims", "faces", "degeneracies")

    def __init__(self, dims: Sequence[int], faces: dict, degeneracies: dict, validate: bool = True):
        self.dims = tuple(dims)
        self.faces = faces
        self.degeneracies = degeneracies
        if validate:
            self.validate()

    @property
    def levels(self) -> int:
        return len(self.dims)

    def validate(self):
        L = len(self.dims)
        for n in range(1, L):
            for i in range(n + 1):
                m = self.faces[(n, i)]
                if len(m) != self.dims[n - 1] or (m and len(m[0]) != self.dims[n]):
                    raise InvariantViolation("simplicial-matrix-shape", f"d{i} at level {n}")
        for n in range(L - 1):
            for j in range(n + 1):
                m = self.degeneracies[(n, j)]
                if len(m) != self.dims[n + 1] or (m and len(m[0]) != self.dims[n]):
                    raise InvariantViolation("simplicial-matrix-shape", f"s{j} at level {n}")
        for n in range(2, L):
            for j in range(n + 1):
                for i in range(j):
                    lhs = mat_mul(self.faces[(n - 1, i)], self.faces[(n, j)])
                    rhs = mat_mul(self.faces[(n - 1, j - 1)], self.faces[(n, i)])
                    if lhs != rhs:
                        raise InvariantViolation("simplicial-identity-dd", f"level {n} d{i}d{j}")
        for n in range(L - 1):
            for j in range(n + 1):
                for i in range(n + 2):
                    lhs = mat_mul(self.faces[(n + 1, i)], self.degeneracies[(n, j)])
                    if i < j:
                        rhs = mat_mul(self.degeneracies[(n - 1, j - 1)], self.faces[(n, i)])
                    elif i in (j, j + 1):
                        rhs = identity_matrix(self.dims[n])
                    else:
                        rhs = mat_mul(self.degeneracies[(n - 1, j)], self.faces[(n, i - 1)])
                    if lhs != rhs:
                        raise InvariantViolation("simplicial-identity-ds", f"level {n} d{i}s{j}")
        for n in range(L - 2):
            for j in range(n + 1):
                for i in range(j + 1):
                    lhs = mat_mul(self.degeneracies[(n + 1, i)], self.degeneracies[(n, j)])
                    rhs = mat_mul(self.degeneracies[(n + 1, j + 1)], self.degeneracies[(n, i)])
                    if lhs != rhs:
                        raise InvariantViolation("simplicial-identity-ss", f"level {n} s{i}s{j}")
        return True

    def normalized_complex(self) -> tuple:
        """Dold-Kan normalization: N_n = ∩_{i>=1} ker d_i with d_0 as the
        differential.  Returns (dims of N, boundary matrices, bases)."""
        bases = []
        for n in range(self.levels):
            if n == 0:
                basis = [
                    tuple(Fraction(1 if i == j else 0) for i in range(self.dims[0]))
                    for j in range(self.dims[0])
                ]
            else:
                stacked = []
                for i in range(1, n + 1):
                    stacked.extend(self.faces[(n, i)])
                basis = nullspace(tuple(stacked), ncols=self.dims[n])
            bases.append(basis)
        boundaries = []
        for n in range(1, self.levels):
            src = bases[n]
            tgt = bases[n - 1]
            tgt_mat = column_stack(tgt) if tgt else ()
            cols = []
            for vec in src:
                image = tuple(
                    sum((r * x for r, x in zip(row, vec)), Fraction(0))
                    for row in self.faces[(n, 0)]
                )
                if tgt:
                    coords = solve(tgt_mat, image)
                    if coords is None:
                        raise InvariantViolation(
                            "normalization-image-escapes", f"level {n}"
                        )
                    cols.append(coords)
                else:
                    if any(image):
                        raise InvariantViolation("normalization-image-escapes")
                    cols.append(())
            nrows = len(tgt)
            boundary = tuple(
                tuple(cols[c][r] for c in range(len(src))) for r in range(nrows)
            )
            boundaries.append(boundary)
        return [len(b) for b in bases], boundaries, bases

    def betti_numbers(self) -> list:
        """Homology dimensions of the normalized complex; the top entry
        lacks the incoming differential and is informational."""
        dims, boundaries, _ = self.normalized_complex()
        ranks = [rank(b) for b in boundaries]
        out = []
        for k, d in enumerate(dims):
            r_in = ranks[k] if k < len(ranks) else 0
            r_out = ranks[k - 1] if k >= 1 else 0
            out.append(d - r_in - r_out)
        return out

    def unnormalized_betti(self) -> list:
        """Same homology from the alternating-sum (Moore) complex; a
        cross-check on the normalization."""
        boundaries = []
        for n in range(1, self.levels):
            total = zero_matrix(self.dims[n - 1], self.dims[n])
            for i in range(n + 1):
                m = self.faces[(n, i)]
                sign = 1 if i % 2 == 0 else -1
                total = tuple(
                    tuple(t + sign * x for t, x in zip(trow, mrow))
                    for trow, mrow in zip(total, m)
                )
            boundaries.append(total)
        ranks = [rank(b) for b in boundaries]
        out = []
        for k, d in enumerate(self.dims):
            r_in = ranks[k] if k < len(ranks) else 0
            r_out = ranks[k - 1] if k >= 1 else 0
            out.append(d - r_in - r_out)
        return out


def _hochschild_base_point(cospan: CospanPresentation, p: RationalPoint, n: int) -> tuple:
    fx = cospan.left(p.x)
    return p.x + fx * n + p.y


def jet_mapping_complex(
    cospan: CospanPresentation,
    p: RationalPoint,
    jet_order: int = 2,
    levels: int = 3,
    target_dim: int = 1,
    validate: bool = True,
) -> SimplicialVectorSpace:
    """Jets of the Hochschild algebra at a planted intersection point.

    Level n is the order-N jet space of functions on X × Z^n × Y at the
    point (x_p, f(x_p), ..., y_p), tensored with the target dimension;
    faces and degeneracies are the Hochschild substitutions followed by
    jet truncation.
    """
    if jet_order < 1:
        raise InvariantViolation("jet-order-too-small")
    if levels < 2:
        raise InvariantViolation("jet-levels-too-small")
    a, b, c = cospan.dims
    jets = []
    bases = []
    for n in range(levels):
        alg = JetAlgebra(a + n * c + b, jet_order)
        if alg.dim * target_dim > JET_DIMENSION_LIMIT:
            raise BoundExceeded("jet space dimension guard")
        jets.append(alg)
        bases.append(_hochschild_base_point(cospan, p, n))
    faces = {}
    degeneracies = {}
    for n in range(1, levels):
        for i in range(n + 1):
            subs = _hochschild_face_substitutions(cospan, n - 1, i)
            mat = _jet_transfer_matrix(jets[n], bases[n], jets[n - 1], bases[n - 1], subs)
            faces[(n, i)] = _block_copies(mat, target_dim)
    for n in range(levels - 1):
        for j in range(n + 1):
            subs = _hochschild_degeneracy_substitutions(cospan, n, j)
            mat = _jet_transfer_matrix(jets[n], bases[n], jets[n + 1], bases[n + 1], subs)
            degeneracies[(n, j)] = _block_copies(mat, target_dim)
    dims = [jets[n].dim * target_dim for n in range(levels)]
    return SimplicialVectorSpace(dims, faces, degeneracies, validate=validate)


def mapping_space_betti(
    cospan: CospanPresentation,
    p: RationalPoint,
    jet_order: int = 2,
    levels: int = 3,
    target_dim: int = 1,
) -> list:
    """Betti numbers of the normalized chain complex of the jet model of
    the mapping space into a linear target."""
    complex_ = jet_mapping_complex(cospan, p, jet_order, levels, target_dim)
    return complex_.betti_numbers()


def koszul_betti(codim: int) -> list:
    """Graded dimensions of the exterior algebra on the normal space:
    the experimental self-intersection oracle."""
    if codim < 0:
        raise InvariantViolation("koszul-negative-codimension")
    return [comb(codim, k) for k in range(codim + 1)]


# ---------------------------------------------------------------------------
# Nerve comparison


def delta1_simplex_maps(n: int) -> list:
    """Monotone maps [n] → [1], encoded by the first position mapping
    to 1 (so n+1 encodes the constant-0 map)."""
    out = []
    for t in range(n + 2):
        out.append(tuple(0 if k < t else 1 for k in range(n + 1)))
    return out


def delta1_face_rule_check(n: int, i: int) -> bool:
    """The i-th face on partition encodings identifies i and i+1."""
    maps = delta1_simplex_maps(n + 1)
    small = delta1_simplex_maps(n)

    def encode(m, length):
        # first index where the map takes value 1; length+1 if never
        for k, v in enumerate(m):
            if v == 1:
                return k
        return length + 1

    for t, m in enumerate(maps):
        composed = tuple(m[k if k < i else k + 1] for k in range(n + 1))
        t2 = encode(composed, n)
        expected = t if t <= i else t - 1
        if t2 != expected or composed not in small:
            return False
    return True


def delta1_degeneracy_rule_check(n: int, j: int) -> bool:
    """The j-th degeneracy on partition encodings skips j+1."""
    maps = delta1_simplex_maps(n)

    def encode(m, length):
        for k, v in enumerate(m):
            if v == 1:
                return k
        return length + 1

    for t, m in enumerate(maps):
        composed = tuple(m[k if k <= j else k - 1] for k in range(n + 2))
        t2 = encode(composed, n + 1)
        expected = t if t <= j else t + 1
        if t2 != expected:
            return False
    return True


_COSPAN_OBJECTS = ("x", "y", "z")


def nerve_chains(n: int) -> list:
    """n-simplices of the nerve of the cospan shape x → z ← y: monotone
    chains in the poset with x, y below z."""

    def leq(o1, o2):
        return o1 == o2 or o2 == "z"

    chains = [("x",), ("y",), ("z",)]
    for _ in range(n):
        chains = [ch + (o,) for ch in chains for o in _COSPAN_OBJECTS if leq(ch[-1], o)]
    return chains


def _nerve_structure_substitutions(cospan: CospanPresentation, theta: Sequence[int], k: int, m: int):
    """Substitutions for the function-level structure map along a
    monotone θ: [k] → [m]: the block of an m-chain σ reads off the block
    of σ∘θ, pushed through the cospan arrow when the final objects
    differ."""
    a, b, c = cospan.dims
    size = {"x": a, "y": b, "z": c}
    src_chains = nerve_chains(m)
    tgt_chains = nerve_chains(k)
    tgt_offsets = {}
    pos = 0
    for ch in tgt_chains:
        tgt_offsets[ch] = pos
        pos += size[ch[-1]]
    total = pos
    subs = []
    for sigma in src_chains:
        tau = tuple(sigma[theta[t]] for t in range(k + 1))
        off = tgt_offsets[tau]
        src_obj = tau[-1]
        dst_obj = sigma[-1]
        if src_obj == dst_obj:
            subs.extend(
                Polynomial.variable(total, off + t) for t in range(size[dst_obj])
            )
        elif src_obj == "x" and dst_obj == "z":
            subs.extend(_embed(pcomp, total, off) for pcomp in cospan.left.components)
        elif src_obj == "y" and dst_obj == "z":
            subs.extend(_embed(pcomp, total, off) for pcomp in cospan.right.components)
        else:
            raise InvariantViolation("nerve-no-arrow", f"{src_obj} → {dst_obj}")
    return subs, total


def _nerve_base_point(cospan: CospanPresentation, p: RationalPoint, n: int) -> tuple:
    fx = cospan.left(p.x)
    base = []
    for ch in nerve_chains(n):
        obj = ch[-1]
        base.extend({"x": p.x, "y": p.y, "z": fx}[obj])
    return tuple(base)


def nerve_jet_complex(
    cospan: CospanPresentation,
    p: RationalPoint,
    jet_order: int = 2,
    levels: int = 3,
    target_dim: int = 1,
    validate: bool = True,
) -> SimplicialVectorSpace:
    a, b, c = cospan.dims
    size = {"x": a, "y": b, "z": c}
    jets = []
    bases = []
    for n in range(levels):
        nvars = sum(size[ch[-1]] for ch in nerve_chains(n))
        alg = JetAlgebra(nvars, jet_order)
        if alg.dim * target_dim > JET_DIMENSION_LIMIT:
            raise BoundExceeded("jet space dimension guard")
        jets.append(alg)
        bases.append(_nerve_base_point(cospan, p, n))
    faces = {}
    degeneracies = {}
    for n in range(1, levels):
        for i in range(n + 1):
            theta = [t if t < i else t + 1 for t in range(n)]  # δ_i: [n-1] → [n]
            subs, _ = _nerve_structure_substitutions(cospan, theta, n - 1, n)
            mat = _jet_transfer_matrix(jets[n], bases[n], jets[n - 1], bases[n - 1], subs)
            faces[(n, i)] = _block_copies(mat, target_dim)
    for n in range(levels - 1):
        for j in range(n + 1):
            theta = [t if t <= j else t - 1 for t in range(n + 2)]  # σ_j: [n+1] → [n]
            subs, _ = _nerve_structure_substitutions(cospan, theta, n + 1, n)
            mat = _jet_transfer_matrix(jets[n], bases[n], jets[n + 1], bases[n + 1], subs)
            degeneracies[(n, j)] = _block_copies(mat, target_dim)
    dims = [jets[n].dim * target_dim for n in range(levels)]
    return SimplicialVectorSpace(dims, faces, degeneracies, validate=validate)


def nerve_cosimplicial_betti(
    cospan: CospanPresentation,
    p: RationalPoint,
    jet_order: int = 2,
    levels: int = 3,
    target_dim: int = 1,
) -> list:
    """Betti numbers computed through the nerve resolution of the cospan
    index (3 objects, 2 nonidentity arrows); verifies the partition
    combinatorics of the 1-simplex along the way."""
    for n in range(min(levels + 1, 5)):
        if len(delta1_simplex_maps(n)) != n + 2:
            raise InvariantViolation("nerve-partition-count", f"level {n}")
        for i in range(n + 2):
            if not delta1_face_rule_check(n, i):
                raise InvariantViolation("nerve-face-rule", f"d{i} at level {n}")
        for j in range(n + 1):
            if not delta1_degeneracy_rule_check(n, j):
                raise InvariantViolation("nerve-degeneracy-rule", f"s{j} at level {n}")
    complex_ = nerve_jet_complex(cospan, p, jet_order, levels, target_dim)
    return complex_.betti_numbers()


# ---------------------------------------------------------------------------
# PL retraction pathology


def pl_retraction(x: Fraction, y: Fraction) -> Fraction:
    """min on the positive quadrant, max on the negative one, 0 elsewhere."""
    if x >= 0 and y >= 0:
        return min(x, y)
    if x <= 0 and y <= 0:
        return max(x, y)
    return Fraction(0)


@dataclass
class PLReport:
    grid_points: int
    retraction_identity_ok: bool
    axes_collapse_ok: bool
    continuity_ok: bool
    derivative_witness: dict
    failure_witness: dict | None = None

    @property
    def verdict(self) -> bool:
        return self.retraction_identity_ok and self.axes_collapse_ok and self.continuity_ok


def pl_retraction_check(grid_bound: Fraction = Fraction(5), steps: int = 101) -> PLReport:
    """Exact grid verification of the retraction of the diagonal and the
    axes collapse, continuity across quadrant boundaries, and a witness
    of the one-sided derivative mismatch along the diagonal."""
    bound = Fraction(grid_bound)
    if bound <= 0 or steps < 3:
        raise InvariantViolation("pl-grid-parameters")
    h = 2 * bound / (steps - 1)
    grid = [-bound + k * h for k in range(steps)]
    failure = None
    retraction_ok = True
    for t in grid:
        if pl_retraction(t, t) != t:
            retraction_ok = False
            failure = failure or {"check": "retraction-identity", "point": (str(t), str(t))}
    axes_ok = True
    for t in grid:
        if pl_retraction(t, Fraction(0)) != 0 or pl_retraction(Fraction(0), t) != 0:
            axes_ok = False
            failure = failure or {"check": "axes-collapse", "point": (str(t), "0")}

    def region_values(x, y):
        vals = []
        if x >= 0 and y >= 0:
            vals.append(min(x, y))
        if x <= 0 and y <= 0:
            vals.append(max(x, y))
        if (x >= 0 and y <= 0) or (x <= 0 and y >= 0):
            vals.append(Fraction(0))
        return vals

    continuity_ok = True
    for t in grid:
        for p in ((t, Fraction(0)), (Fraction(0), t)):
            vals = region_values(*p)
            if len(set(vals)) != 1:
                continuity_ok = False
                failure = failure or {
                    "check": "continuity",
                    "point": (str(p[0]), str(p[1])),
                    "values": [str(v) for v in vals],
                }

    s = bound / 2
    right = (pl_retraction(s + h, s - h) - pl_retraction(s, s)) / h
    left = (pl_retraction(s - h, s + h) - pl_retraction(s, s)) / (-h)
    witness = {
        "point": (str(s), str(s)),
        "direction": ("1", "-1"),
        "step": str(h),
        "right_quotient": str(right),
        "left_quotient": str(left),
        "mismatch": right != left,
    }
    return PLReport(
        grid_points=steps * steps,
        retraction_identity_ok=retraction_ok,
        axes_collapse_ok=axes_ok,
        continuity_ok=continuity_ok,
        derivative_witness=witness,
        failure_witness=failure,
    )
