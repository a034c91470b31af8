"""Exact rational linear algebra: fraction-free Bareiss rank, Gaussian
elimination over the rationals for solving and nullspaces, and chain
complexes with their homology dimensions.

No floating point anywhere; matrices are tuples of tuples of Fraction.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .errors import InvariantViolation

Matrix = tuple


def matrix(rows) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def zero_matrix(nrows: int, ncols: int) -> Matrix:
    return tuple(tuple(Fraction(0) for _ in range(ncols)) for _ in range(nrows))


def identity_matrix(n: int) -> Matrix:
    return tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
    )


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise InvariantViolation("matrix-shape-mismatch")
    if not b:
        return tuple(() for _ in a)
    ncols = len(b[0])
    bt = list(zip(*b))
    return tuple(
        tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt)
        for row in a
    )


def mat_is_zero(a: Matrix) -> bool:
    return all(not x for row in a for x in row)


def mat_vec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def rank(a: Matrix) -> int:
    """Rank by fraction-free Bareiss elimination on the integer matrix
    obtained by clearing row denominators."""
    if not a or not a[0]:
        return 0
    rows = []
    for row in a:
        mult = lcm(*(x.denominator for x in row)) if row else 1
        rows.append([int(x * mult) for x in row])
    nrows, ncols = len(rows), len(rows[0])
    prev = 1
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                rows[i][j] = (rows[r][c] * rows[i][j] - rows[i][c] * rows[r][j]) // prev
            rows[i][c] = 0
        prev = rows[r][c]
        r += 1
        if r == nrows:
            break
    return r


def rref(a: Matrix) -> tuple:
    """Reduced row echelon form over the rationals.

    Returns (rref matrix as list of lists, pivot column list).
    """
    m = [list(row) for row in a]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def nullspace(a: Matrix, ncols: int | None = None) -> list:
    """Basis vectors (as tuples) of the kernel of a."""
    if ncols is None:
        ncols = len(a[0]) if a else 0
    if not a or not a[0]:
        return [tuple(Fraction(1 if i == j else 0) for i in range(ncols)) for j in range(ncols)]
    red, pivots = rref(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(tuple(v))
    return basis


def solve(a: Matrix, b: Sequence) -> tuple | None:
    """One solution x of a·x = b, or None when inconsistent."""
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    aug = [list(row) + [Fraction(b[i])] for i, row in enumerate(a)]
    red, pivots = rref(tuple(tuple(r) for r in aug))
    for row in red:
        if all(not x for x in row[:-1]) and row[-1]:
            return None
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        if pc == ncols:
            return None
        x[pc] = red[r][-1]
    return tuple(x)


def in_column_space(a: Matrix, v: Sequence) -> bool:
    """Exact membership of v in the span of the columns of a."""
    return solve(a, v) is not None


def column_stack(columns: Sequence[Sequence]) -> Matrix:
    if not columns:
        return ()
    return tuple(tuple(col[i] for col in columns) for i in range(len(columns[0])))


class ChainComplex:
    """Nonnegatively graded spaces with boundary maps d_k: C_k → C_{k-1}.

    Degrees may be relabeled by an offset for display; homology only
    needs the ranks.  Consecutive composites must vanish exactly.
    """

    __slots__ = ("dims", "boundaries", "degree_offset")

    def __init__(self, dims: Sequence[int], boundaries: Sequence[Matrix], degree_offset: int = 0):
        self.dims = tuple(dims)
        self.boundaries = tuple(boundaries)
        self.degree_offset = degree_offset
        if len(self.boundaries) != max(len(self.dims) - 1, 0):
            raise InvariantViolation(
                "complex-boundary-count",
                f"{len(self.dims)} spaces need {max(len(self.dims) - 1, 0)} boundary maps",
            )
        for k, d in enumerate(self.boundaries):
            if len(d) != self.dims[k] or (d and len(d[0]) != self.dims[k + 1]):
                raise InvariantViolation(
                    "complex-boundary-shape", f"map into degree {k} has wrong shape"
                )
        for k in range(len(self.boundaries) - 1):
            if not mat_is_zero(mat_mul(self.boundaries[k], self.boundaries[k + 1])):
                raise InvariantViolation(
                    "complex-boundary-squared", f"d{k} ∘ d{k + 1} is nonzero"
                )

    def homology_dimensions(self) -> list:
        """dim H_k for k = 0..len(dims)-1 (top degree has no incoming map
        beyond the stored data, so its entry is a truncation artifact)."""
        ranks = [rank(d) for d in self.boundaries]
        out = []
        for k, dim in enumerate(self.dims):
            r_out = ranks[k - 1] if k >= 1 else 0
            r_in = ranks[k] if k < len(ranks) else 0
            out.append(dim - r_out - r_in)
        return out
