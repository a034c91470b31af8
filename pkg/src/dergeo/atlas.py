"""Atlas and site predicates for diagrams of opens, and constructions
that produce new atlases from old: completion, pullback, heredity,
composition, subordination.

An atlas is a monotone diagram of opens that covers the space and whose
binary intersections are covered by the opens sitting below both
indices.  Equivalently, its extension to the sieve lattice preserves
finite meets; both predicates are implemented independently.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, NamedTuple

from .errors import BoundExceeded, InvariantViolation
from .lattice import (
    SIEVE_ENUMERATION_BOUND,
    FinitePoset,
    FiniteSpace,
    Sieve,
    frame_of,
    open_label,
    sieve_lattice,
)

COMPLETION_BOUND = 4096


class AtlasDiagram:
    """A monotone map from an index poset into the opens of a space."""

    __slots__ = ("index", "space", "assignment")

    def __init__(self, index: FinitePoset, space: FiniteSpace, assignment: Mapping):
        self.index = index
        self.space = space
        assignment = {e: frozenset(assignment[e]) for e in index.elements}
        if set(assignment) != set(index.elements):
            raise InvariantViolation("atlas-assignment-total", "missing index element")
        for e, o in assignment.items():
            if not space.is_open(o):
                raise InvariantViolation(
                    "atlas-assignment-not-open", f"value of {e!r} is not an open set"
                )
        for a in index.elements:
            for b in index.elements:
                if index.leq(a, b) and not assignment[a] <= assignment[b]:
                    raise InvariantViolation(
                        "atlas-assignment-monotone", f"{a!r} <= {b!r} but U_a ⊄ U_b"
                    )
        self.assignment = assignment

    def __getitem__(self, e) -> frozenset:
        return self.assignment[e]

    def __repr__(self):
        parts = ", ".join(f"{e!r}:{sorted(map(repr, o))}" for e, o in self.assignment.items())
        return f"AtlasDiagram({parts})"

    def union_over(self, members: Iterable) -> frozenset:
        u = frozenset()
        for e in members:
            u |= self.assignment[e]
        return u


class ContinuousMap:
    """A point map whose preimages of opens are open."""

    __slots__ = ("source", "target", "point_map")

    def __init__(self, source: FiniteSpace, target: FiniteSpace, point_map: Mapping):
        self.source = source
        self.target = target
        pm = dict(point_map)
        if set(pm) != set(source.points):
            raise InvariantViolation("map-not-total", "point map must cover all source points")
        for p, q in pm.items():
            if q not in target.points:
                raise InvariantViolation("map-point-outside-target", repr(q))
        self.point_map = pm
        for o in target.opens:
            if not source.is_open(self.preimage(o)):
                raise InvariantViolation(
                    "map-not-continuous", f"preimage of {set(o)!r} is not open"
                )

    def preimage(self, open_set: Iterable) -> frozenset:
        o = frozenset(open_set)
        return frozenset(p for p in self.source.points if self.point_map[p] in o)

    @classmethod
    def identity(cls, space: FiniteSpace) -> "ContinuousMap":
        return cls(space, space, {p: p for p in space.points})


def trivial_atlas(space: FiniteSpace) -> AtlasDiagram:
    """The one-element diagram picking out the whole space."""
    index = FinitePoset(["*"])
    return AtlasDiagram(index, space, {"*": space.full})


def tautological_atlas(space: FiniteSpace) -> AtlasDiagram:
    """The identity diagram on the open-set lattice."""
    index = frame_of(space)
    return AtlasDiagram(index, space, {lbl: frozenset(lbl) for lbl in index.elements})


def inclusion_atlas(space: FiniteSpace, opens: Iterable[Iterable]) -> AtlasDiagram:
    """The inclusion of a set of opens, ordered by containment."""
    opens = [frozenset(o) for o in opens]
    labels = [open_label(o) for o in opens]
    if len(set(labels)) != len(labels):
        raise InvariantViolation("atlas-duplicate-open", "inclusion diagram repeats an open")
    pairs = [
        (la, lb)
        for la, a in zip(labels, opens)
        for lb, b in zip(labels, opens)
        if a <= b
    ]
    index = FinitePoset(labels, pairs)
    return AtlasDiagram(index, space, dict(zip(labels, opens)))


def is_atlas_cover_condition(diagram: AtlasDiagram) -> bool:
    """Condition (i): the opens cover, and U_i ∩ U_j = ⋃_{k <= i,j} U_k."""
    space, index = diagram.space, diagram.index
    masks = [space.mask_of(diagram.assignment[e]) for e in index.elements]
    full = space.mask_of(space.full)
    total = 0
    for m in masks:
        total |= m
    if total != full:
        return False
    n = len(index.elements)
    down = [index.down_mask(e) for e in index.elements]
    for i in range(n):
        for j in range(i, n):
            lows = down[i] & down[j]
            u = 0
            m = lows
            while m:
                k = (m & -m).bit_length() - 1
                m &= m - 1
                u |= masks[k]
            if u != masks[i] & masks[j]:
                return False
    return True


def is_atlas(diagram: AtlasDiagram) -> bool:
    return is_atlas_cover_condition(diagram)


def is_atlas_meet_condition(diagram: AtlasDiagram, bound: int = SIEVE_ENUMERATION_BOUND) -> bool:
    """Condition (iii): K ↦ ⋃_{k∈K} U_k preserves binary meets and the
    empty meet (the top sieve maps onto the whole space).

    Brute-forced over all sieve pairs, independently of the pairwise
    condition; raises BoundExceeded on a large index.
    """
    space, index = diagram.space, diagram.index
    sieves = sieve_lattice(index, bound=bound)
    masks = [space.mask_of(diagram.assignment[e]) for e in index.elements]
    ext = {}
    for s in sieves:
        u = 0
        m = s.mask
        while m:
            k = (m & -m).bit_length() - 1
            m &= m - 1
            u |= masks[k]
        ext[s.mask] = u
    full = space.mask_of(space.full)
    top = (1 << len(index.elements)) - 1
    if ext[top] != full:
        return False
    sieve_masks = sorted(ext)
    for a in sieve_masks:
        for b in sieve_masks:
            if b > a:
                break
            if ext[a & b] != ext[a] & ext[b]:
                return False
    return True


def is_site(diagram: AtlasDiagram) -> bool:
    """An atlas whose member unions generate every open set."""
    if not is_atlas_cover_condition(diagram):
        return False
    for v in diagram.space.opens:
        u = frozenset()
        for e in diagram.index.elements:
            if diagram.assignment[e] <= v:
                u |= diagram.assignment[e]
        if u != v:
            return False
    return True


def atlas_completion(space: FiniteSpace, cover: Iterable[Iterable], bound: int = COMPLETION_BOUND) -> AtlasDiagram:
    """Close an open cover under finite intersections.

    Index elements are the inhabited subsets of the cover positions,
    ordered by reverse inclusion; the assignment takes intersections.
    """
    cover = [frozenset(o) for o in cover]
    for o in cover:
        if not space.is_open(o):
            raise InvariantViolation("completion-member-not-open", repr(set(o)))
    u = frozenset()
    for o in cover:
        u |= o
    if u != space.full:
        raise InvariantViolation("completion-cover", "the given opens do not cover the space")
    if 1 << len(cover) > bound:
        raise BoundExceeded(f"completion over {len(cover)} opens exceeds bound {bound}")
    subsets = []
    for r in range(1, len(cover) + 1):
        subsets.extend(combinations(range(len(cover)), r))
    pairs = [(a, b) for a in subsets for b in subsets if set(a) >= set(b)]
    index = FinitePoset(subsets, pairs)
    assignment = {}
    for js in subsets:
        inter = space.full
        for j in js:
            inter &= cover[j]
        assignment[js] = inter
    return AtlasDiagram(index, space, assignment)


class PullbackAtlas(NamedTuple):
    diagram: AtlasDiagram
    input_was_atlas: bool


def pullback_atlas(f: ContinuousMap, diagram: AtlasDiagram) -> PullbackAtlas:
    """Precompose the diagram with the preimage map of f.

    When the input is an atlas the pullback is one too; a non-atlas
    input is still pulled back but flagged.
    """
    if diagram.space != f.target:
        raise InvariantViolation("pullback-space-mismatch", "atlas does not live on the target")
    pulled = {e: f.preimage(diagram.assignment[e]) for e in diagram.index.elements}
    return PullbackAtlas(
        AtlasDiagram(diagram.index, f.source, pulled),
        is_atlas_cover_condition(diagram),
    )


def subspace(space: FiniteSpace, open_set: Iterable) -> FiniteSpace:
    o = frozenset(open_set)
    if not space.is_open(o):
        raise InvariantViolation("subspace-not-open", repr(set(o)))
    return FiniteSpace(o, [v & o for v in space.opens])


def restrict_to_sieve(diagram: AtlasDiagram, sieve: Sieve) -> AtlasDiagram:
    """Heredity: restrict an atlas to a sieve, over the union it covers."""
    if sieve.poset is not diagram.index and sieve.poset != diagram.index:
        raise InvariantViolation("sieve-wrong-poset", "sieve belongs to a different index")
    covered = diagram.union_over(sieve.members)
    sub = subspace(diagram.space, covered)
    index = diagram.index.restrict(sieve.members)
    return AtlasDiagram(index, sub, {e: diagram.assignment[e] for e in index.elements})


def _eta_as_sieves(index: FinitePoset, J: FinitePoset, eta: Mapping) -> dict:
    out = {}
    for j in J.elements:
        val = eta[j]
        members = val.members if isinstance(val, Sieve) else frozenset(val)
        out[j] = Sieve(index, frozenset(members))
    return out


def eta_is_left_exact(index: FinitePoset, J: FinitePoset, eta: Mapping) -> bool:
    """Brute-force left-exactness of a monotone map J → sieves of I.

    Checked over pairs of elements of J plus the empty meet: whenever
    j ∧ j' exists in J it must map to η(j) ∩ η(j'), and when J has a
    top element it must map to the whole of I.  Meets that do not exist
    in J impose no condition (an antichain index is vacuously exact).
    """
    sieves = _eta_as_sieves(index, J, eta)
    for a in J.elements:
        for b in J.elements:
            if J.leq(a, b) and not sieves[a].members <= sieves[b].members:
                return False
    masks = {j: J.down_mask(j) for j in J.elements}
    all_mask = (1 << len(J.elements)) - 1
    for t in J.elements:
        if masks[t] == all_mask:  # top element: the empty meet
            if sieves[t].members != frozenset(index.elements):
                return False
    for a in J.elements:
        for b in J.elements:
            lows = masks[a] & masks[b]
            meet = None
            for c in J.elements:
                if masks[c] == lows:
                    meet = c
                    break
            if meet is None:
                continue
            if sieves[meet].members != sieves[a].members & sieves[b].members:
                return False
    return True


def compose_atlases(diagram: AtlasDiagram, J: FinitePoset, eta: Mapping) -> AtlasDiagram:
    """Composition along a left-exact map η: J → sieves of I.

    Requires: η left exact; the η-extension of U over J an atlas of X;
    and each restriction U|η(j) an atlas of its union.  Returns the
    diagram over I↓J = {(i, j) : i ∈ η(j)} pulled back from U.
    """
    index, space = diagram.index, diagram.space
    sieves = _eta_as_sieves(index, J, eta)
    if not eta_is_left_exact(index, J, eta):
        raise InvariantViolation("composition-eta-not-left-exact")
    over_j = AtlasDiagram(J, space, {j: diagram.union_over(sieves[j].members) for j in J.elements})
    if not is_atlas_cover_condition(over_j):
        raise InvariantViolation("composition-extension-not-atlas")
    for j in J.elements:
        if not is_atlas_cover_condition(restrict_to_sieve(diagram, sieves[j])):
            raise InvariantViolation(
                "composition-restriction-not-atlas", f"restriction to η({j!r})"
            )
    elements = [
        (i, j) for j in J.elements for i in index.elements if i in sieves[j].members
    ]
    pairs = [
        (a, b)
        for a in elements
        for b in elements
        if index.leq(a[0], b[0]) and J.leq(a[1], b[1])
    ]
    comma = FinitePoset(elements, pairs)
    return AtlasDiagram(comma, space, {(i, j): diagram.assignment[i] for (i, j) in elements})


def subordinate(site_diagram: AtlasDiagram, atlas_diagram: AtlasDiagram) -> AtlasDiagram:
    """Subordinate a site to an atlas: the new site's opens each sit
    inside some member of the atlas, the witness being the J-component
    of each index pair."""
    if site_diagram.space != atlas_diagram.space:
        raise InvariantViolation("subordination-space-mismatch")
    if not is_site(site_diagram):
        raise InvariantViolation("subordination-first-not-site")
    if not is_atlas_cover_condition(atlas_diagram):
        raise InvariantViolation("subordination-second-not-atlas")
    index = site_diagram.index
    eta = {
        j: frozenset(
            i
            for i in index.elements
            if site_diagram.assignment[i] <= atlas_diagram.assignment[j]
        )
        for j in atlas_diagram.index.elements
    }
    return compose_atlases(site_diagram, atlas_diagram.index, eta)
