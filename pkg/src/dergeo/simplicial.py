"""Truncated simplicial machinery: the test-functor shape of an index
poset, indexed hypercovers, boundary spheres, fillings, and the
atlas ↔ hypercover conversions.

A level-n simplex of the shape of a poset I is a map from nonempty
subsets of {0..n} to I sending larger subsets to smaller elements
(monotone into the opposite poset): the full subset carries the
minimum, and labels evaluate there, so fillings of a boundary sphere
are exactly the common lower bounds of its facet values.  Subsets are
bitmasks; a simplex is the value tuple indexed by mask-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Mapping, NamedTuple, Optional

from .atlas import AtlasDiagram, inclusion_atlas, is_atlas_cover_condition
from .errors import BoundExceeded, InvariantViolation
from .lattice import FinitePoset, FiniteSpace

DEFAULT_TRUNCATION = 3
SIMPLEX_LIMIT = 100_000


def _delta_mask(mask: int, i: int) -> int:
    """Direct image of a subset under the injection skipping value i."""
    low = mask & ((1 << i) - 1)
    return low | (mask >> i) << (i + 1)


def _sigma_mask(mask: int, j: int) -> int:
    """Direct image of a subset under the surjection merging j and j+1."""
    low = mask & ((1 << (j + 1)) - 1)
    return low | (mask >> (j + 1)) << j


class TruncatedSimplicialSet:
    """Levels 0..N of simplices with face and degeneracy dictionaries."""

    __slots__ = ("truncation", "levels", "faces", "degeneracies")

    def __init__(self, truncation, levels, faces, degeneracies):
        self.truncation = truncation
        self.levels = tuple(tuple(l) for l in levels)
        self.faces = faces
        self.degeneracies = degeneracies
        if len(self.levels) != truncation + 1:
            raise InvariantViolation("simplicial-level-count")

    def face(self, n: int, i: int, simplex):
        return self.faces[(n, i)][simplex]

    def degeneracy(self, n: int, j: int, simplex):
        return self.degeneracies[(n, j)][simplex]

    def validate(self):
        """Check every simplicial identity expressible within truncation."""
        N = self.truncation
        for n in range(1, N + 1):
            for i in range(n + 1):
                fmap = self.faces[(n, i)]
                for s in self.levels[n]:
                    if fmap[s] not in set(self.levels[n - 1]):
                        raise InvariantViolation("simplicial-face-range")
        for n in range(N):
            for j in range(n + 1):
                dmap = self.degeneracies[(n, j)]
                for s in self.levels[n]:
                    if dmap[s] not in set(self.levels[n + 1]):
                        raise InvariantViolation("simplicial-degeneracy-range")
        for n in range(2, N + 1):
            for j in range(n + 1):
                for i in range(j):
                    for s in self.levels[n]:
                        lhs = self.face(n - 1, i, self.face(n, j, s))
                        rhs = self.face(n - 1, j - 1, self.face(n, i, s))
                        if lhs != rhs:
                            raise InvariantViolation(
                                "simplicial-identity-dd", f"d{i} d{j} at level {n}"
                            )
        for n in range(N):
            for j in range(n + 1):
                for i in range(n + 2):
                    for s in self.levels[n]:
                        lhs = self.face(n + 1, i, self.degeneracy(n, j, s))
                        if i < j:
                            rhs = self.degeneracy(n - 1, j - 1, self.face(n, i, s))
                        elif i in (j, j + 1):
                            rhs = s
                        else:
                            rhs = self.degeneracy(n - 1, j, self.face(n, i - 1, s))
                        if lhs != rhs:
                            raise InvariantViolation(
                                "simplicial-identity-ds", f"d{i} s{j} at level {n}"
                            )
        for n in range(N - 1):
            for j in range(n + 1):
                for i in range(j + 1):
                    for s in self.levels[n]:
                        lhs = self.degeneracy(n + 1, i, self.degeneracy(n, j, s))
                        rhs = self.degeneracy(n + 1, j + 1, self.degeneracy(n, i, s))
                        if lhs != rhs:
                            raise InvariantViolation(
                                "simplicial-identity-ss", f"s{i} s{j} at level {n}"
                            )
        return True


class IotaShape(TruncatedSimplicialSet):
    """Shape of a poset index: simplices are subset-value tuples."""

    __slots__ = ("poset",)

    def __init__(self, poset, truncation, levels, faces, degeneracies):
        super().__init__(truncation, levels, faces, degeneracies)
        self.poset = poset


@lru_cache(maxsize=None)
def iota_test(poset: FinitePoset, truncation: int = DEFAULT_TRUNCATION, limit: int = SIMPLEX_LIMIT) -> IotaShape:
    """All antitone subset-labelings of the standard simplices by the poset.

    Level n holds every map from nonempty subsets of {0..n} to the poset
    that reverses inclusion; faces and degeneracies act by direct-image
    precomposition.
    """
    n_elems = len(poset)
    up_masks = {}
    for e in poset.elements:
        m = 0
        for k, f in enumerate(poset.elements):
            if poset.leq(e, f):
                m |= 1 << k
        up_masks[e] = m
    elem_list = list(poset.elements)

    levels = []
    total = 0
    for n in range(truncation + 1):
        full = (1 << (n + 1)) - 1
        masks = sorted(range(1, full + 1), key=lambda m: (-bin(m).count("1"), m))
        simplices = []

        def rec(pos, vals):
            nonlocal total
            if pos == len(masks):
                out = [None] * full
                for m, v in vals.items():
                    out[m - 1] = v
                simplices.append(tuple(out))
                total += 1
                if total > limit:
                    raise BoundExceeded(f"simplex count exceeds limit {limit}")
                return
            mask = masks[pos]
            allowed = (1 << n_elems) - 1
            for x in range(n + 1):
                if not mask >> x & 1:
                    sup = mask | 1 << x
                    allowed &= up_masks[vals[sup]]
                    if not allowed:
                        return
            m = allowed
            while m:
                k = (m & -m).bit_length() - 1
                m &= m - 1
                vals[mask] = elem_list[k]
                rec(pos + 1, vals)
                del vals[mask]

        if n_elems:
            rec(0, {})
        levels.append(simplices)

    faces = {}
    degeneracies = {}
    for n in range(1, truncation + 1):
        src_full = (1 << (n + 1)) - 1
        tgt_full = (1 << n) - 1
        for i in range(n + 1):
            table = [ _delta_mask(m, i) for m in range(1, tgt_full + 1) ]
            faces[(n, i)] = {
                s: tuple(s[t - 1] for t in table) for s in levels[n]
            }
    for n in range(truncation):
        tgt_full = (1 << (n + 2)) - 1
        for j in range(n + 1):
            table = [ _sigma_mask(m, j) for m in range(1, tgt_full + 1) ]
            degeneracies[(n, j)] = {
                s: tuple(s[t - 1] for t in table) for s in levels[n]
            }
    return IotaShape(poset, truncation, levels, faces, degeneracies)


class IndexedHypercover:
    """A truncated simplicial shape with opens attached functorially."""

    __slots__ = ("shape", "space", "labels")

    def __init__(self, shape: TruncatedSimplicialSet, space: FiniteSpace, labels: Mapping, _validate: bool = True):
        self.shape = shape
        self.space = space
        self.labels = {s: frozenset(o) for s, o in labels.items()}
        if _validate:
            seen = set()
            for lvl in shape.levels:
                for s in lvl:
                    if s in seen:
                        raise InvariantViolation(
                            "hypercover-simplex-ids-unique", repr(s)
                        )
                    seen.add(s)
                    if s not in self.labels:
                        raise InvariantViolation("hypercover-labels-total", repr(s))
                    if not space.is_open(self.labels[s]):
                        raise InvariantViolation("hypercover-label-not-open", repr(s))
            for (n, i), fmap in shape.faces.items():
                for s, t in fmap.items():
                    if not self.labels[s] <= self.labels[t]:
                        raise InvariantViolation(
                            "hypercover-labels-functorial",
                            f"label shrinks along face d{i} at level {n}",
                        )
            for (n, j), dmap in shape.degeneracies.items():
                for s, t in dmap.items():
                    if not self.labels[s] <= self.labels[t]:
                        raise InvariantViolation(
                            "hypercover-labels-functorial",
                            f"label shrinks along degeneracy s{j} at level {n}",
                        )

    @property
    def truncation(self) -> int:
        return self.shape.truncation


def atlas_to_hypercover(diagram: AtlasDiagram, truncation: int = DEFAULT_TRUNCATION) -> IndexedHypercover:
    """Refine a diagram of opens along the test functor of its index.

    Each simplex is labeled by the diagram's value at the full subset
    (the minimum of the labeling), so the level-0 part is the original
    cover and higher levels record iterated overlap witnesses.
    """
    shape = iota_test(diagram.index, truncation)
    labels = {}
    for lvl in shape.levels:
        for s in lvl:
            labels[s] = diagram.assignment[s[-1]]
    # functoriality holds because the diagram is monotone and faces and
    # degeneracies only move the full-subset value upward
    return IndexedHypercover(shape, diagram.space, labels, _validate=False)


@dataclass(frozen=True)
class BoundarySphere:
    """Semisimplicial boundary data of dimension n+1: the n+2 facets."""

    dimension: int
    facets: tuple

    def __post_init__(self):
        if len(self.facets) != self.dimension + 1:
            raise InvariantViolation(
                "sphere-facet-count", f"dimension {self.dimension} needs {self.dimension + 1} facets"
            )


def sphere_is_compatible(shape: TruncatedSimplicialSet, sphere: BoundarySphere) -> bool:
    """Facets must agree on shared faces: d_i τ_j = d_{j-1} τ_i for i < j."""
    m = sphere.dimension
    if m == 1:
        return True
    for j in range(m + 1):
        for i in range(j):
            if shape.face(m - 1, i, sphere.facets[j]) != shape.face(
                m - 1, j - 1, sphere.facets[i]
            ):
                return False
    return True


def boundary_spheres(shape: TruncatedSimplicialSet, dimension: int) -> list:
    """All compatible boundary spheres of the given dimension."""
    if dimension < 1 or dimension > shape.truncation:
        raise BoundExceeded(f"sphere dimension {dimension} outside truncation")
    lvl = shape.levels[dimension - 1]
    out = []

    def rec(chosen):
        j = len(chosen)
        if j == dimension + 1:
            out.append(BoundarySphere(dimension, tuple(chosen)))
            return
        for tau in lvl:
            ok = True
            for i in range(j):
                if dimension >= 2 and shape.face(dimension - 1, i, tau) != shape.face(
                    dimension - 1, j - 1, chosen[i]
                ):
                    ok = False
                    break
            if ok:
                chosen.append(tau)
                rec(chosen)
                chosen.pop()

    rec([])
    return out


def enumerate_fillings(H: IndexedHypercover, sphere: BoundarySphere) -> set:
    """Top simplices restricting to the sphere on every facet."""
    return shape_fillings(H.shape, sphere)


def shape_fillings(shape: TruncatedSimplicialSet, sphere: BoundarySphere) -> set:
    m = sphere.dimension
    if m > shape.truncation:
        raise BoundExceeded("filling dimension outside truncation")
    out = set()
    for nu in shape.levels[m]:
        if all(shape.face(m, i, nu) == sphere.facets[i] for i in range(m + 1)):
            out.add(nu)
    return out


def sphere_filling_table(shape: TruncatedSimplicialSet, max_dim: int) -> dict:
    """Precomputed sphere → fillings lists per dimension (sweep helper)."""
    table = {}
    for dim in range(1, max_dim + 1):
        entries = []
        for sphere in boundary_spheres(shape, dim):
            entries.append((sphere, tuple(shape_fillings(shape, sphere))))
        table[dim] = entries
    return table


def is_hypercover(H: IndexedHypercover, up_to: int, table: Optional[dict] = None) -> bool:
    """Level-0 labels cover the space, and every boundary sphere's
    fillings cover the intersection of its facet labels, through
    dimension up_to."""
    if up_to > H.truncation:
        raise BoundExceeded(f"level {up_to} exceeds truncation {H.truncation}")
    total = frozenset()
    for v in H.shape.levels[0]:
        total |= H.labels[v]
    if total != H.space.full:
        return False
    for n in range(up_to):
        dim = n + 1
        entries = (
            table[dim]
            if table is not None
            else [
                (s, tuple(shape_fillings(H.shape, s)))
                for s in boundary_spheres(H.shape, dim)
            ]
        )
        for sphere, fillings in entries:
            u_s = H.labels[sphere.facets[0]]
            for f in sphere.facets[1:]:
                u_s &= H.labels[f]
            covered = frozenset()
            for nu in fillings:
                covered |= H.labels[nu]
                if u_s <= covered:
                    break
            if not u_s <= covered:
                return False
    return True


class HypercoverAtlasReading(NamedTuple):
    diagram: AtlasDiagram
    verdict: bool
    flattened_verdict: bool


def hypercover_to_atlas(H: IndexedHypercover) -> HypercoverAtlasReading:
    """Read a hypercover as an atlas.

    The verdict checks the covering condition and, over all simplex
    pairs whose join dimension fits the truncation, that the labels of
    the join simplices cover the binary intersection.  The label
    assignment always factors through its image in the open lattice,
    which is returned as a poset-indexed diagram with its own verdict.
    """
    shape, space = H.shape, H.space
    total = frozenset()
    for v in shape.levels[0]:
        total |= H.labels[v]
    verdict = total == space.full

    def front(nu, m, i):
        # restrict to the first i+1 vertices: drop trailing vertices
        cur, lvl = nu, m
        while lvl > i:
            cur = shape.face(lvl, lvl, cur)
            lvl -= 1
        return cur

    def back(nu, m, j):
        cur, lvl = nu, m
        while lvl > j:
            cur = shape.face(lvl, 0, cur)
            lvl -= 1
        return cur

    if verdict:
        N = shape.truncation
        for i in range(N):
            for j in range(N - i):
                m = i + j + 1
                joins = {}
                for nu in shape.levels[m]:
                    key = (front(nu, m, i), back(nu, m, j))
                    joins.setdefault(key, []).append(nu)
                done = False
                for sigma in shape.levels[i]:
                    for tau in shape.levels[j]:
                        meet = H.labels[sigma] & H.labels[tau]
                        covered = frozenset()
                        for nu in joins.get((sigma, tau), ()):
                            covered |= H.labels[nu]
                        if covered != meet:
                            verdict = False
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
            if not verdict:
                break

    image = sorted({H.labels[s] for lvl in shape.levels for s in lvl},
                   key=lambda o: (len(o), sorted(map(repr, o))))
    diagram = inclusion_atlas(space, image) if image else AtlasDiagram(
        FinitePoset([]), space, {}
    )
    return HypercoverAtlasReading(diagram, verdict, is_atlas_cover_condition(diagram))


class FillingComparison(NamedTuple):
    surjective: bool
    bijective: bool
    simplicial_count: int
    semisimplicial_count: int


def semisimplicial_filling_surjectivity(shape: IotaShape, sphere: BoundarySphere) -> FillingComparison:
    """Compare fillings computed simplicially (members of the shape's
    top level restricting to the sphere) with semisimplicial fillings
    (antitone extensions of the sphere's subset data, i.e. common lower
    bounds of the facet values).  For a poset index the restriction map
    is a bijection; surjectivity is the stated lemma."""
    if not isinstance(shape, IotaShape):
        raise InvariantViolation("filling-comparison-needs-poset-shape")
    poset = shape.poset
    simplicial = shape_fillings(shape, sphere)
    facet_tops = [f[-1] for f in sphere.facets]
    semi = set()
    for e in poset.elements:
        if all(poset.leq(e, t) for t in facet_tops):
            semi.add(e)
    image = {nu[-1] for nu in simplicial}
    return FillingComparison(
        surjective=image == semi,
        bijective=image == semi and len(simplicial) == len(semi),
        simplicial_count=len(simplicial),
        semisimplicial_count=len(semi),
    )


def delta_refinement_limit_check(diagram: AtlasDiagram, presheaf, size_guard: int = 200_000) -> bool:
    """Set-level coinitiality of the refinement counit: the matching
    families of a presheaf over the index poset biject with those over
    levels 0..1 of its refined shape (level 1 suffices for posets)."""
    from .sheaf import matching_families  # local import to avoid a cycle

    index, space = diagram.index, diagram.space
    poset_families = matching_families(presheaf, diagram, size_guard=size_guard)

    shape = iota_test(index, 1)
    verts = shape.levels[0]
    edges = shape.levels[1]
    labels = {s: diagram.assignment[s[-1]] for lvl in shape.levels for s in lvl}

    size = 1
    for v in verts:
        size *= max(len(presheaf.sections[labels[v]]), 1)
        if size > size_guard:
            raise BoundExceeded("matching family enumeration too large")

    refined = []
    for combo in product(*[presheaf.sections[labels[v]] for v in verts]):
        assign = dict(zip(verts, combo))
        ok = True
        edge_vals = {}
        for e in edges:
            v0 = shape.face(1, 0, e)
            v1 = shape.face(1, 1, e)
            r0 = presheaf.restrict(labels[v0], labels[e], assign[v0])
            r1 = presheaf.restrict(labels[v1], labels[e], assign[v1])
            if r0 != r1:
                ok = False
                break
            edge_vals[e] = r0
        if ok:
            refined.append((tuple(assign[v] for v in verts), tuple(edge_vals[e] for e in edges)))

    if not verts:
        # empty index: both limits are singletons (the empty family)
        return len(poset_families) == 1 and len(refined) == 1

    elem_order = list(index.elements)
    vert_of = {v: v[-1] for v in verts}
    # project refined families onto the poset index (vertices are the
    # singleton simplices, one per element)
    proj = set()
    for vcombo, _ in refined:
        fam = {vert_of[v]: vcombo[k] for k, v in enumerate(verts)}
        proj.add(tuple(fam[e] for e in elem_order))
    poset_set = {tuple(f[e] for e in elem_order) for f in poset_families}
    return len(refined) == len(proj) and proj == poset_set
