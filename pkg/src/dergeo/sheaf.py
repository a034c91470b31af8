"""Set-valued presheaves on finite spaces: descent along atlases and
hypercovers, sheafification by the plus construction, and the
local-isomorphism predicate.

Restriction tables are stored for every inclusion pair so functoriality
can be checked exhaustively at construction.
"""

from __future__ import annotations

from itertools import product
from typing import TYPE_CHECKING, Iterable, Mapping

from .atlas import AtlasDiagram
from .errors import BoundExceeded, InvariantViolation
from .lattice import FiniteSpace

if TYPE_CHECKING:
    from .simplicial import IndexedHypercover


class Presheaf:
    """Finite section sets per open with restriction maps between them."""

    __slots__ = ("space", "sections", "restrictions")

    def __init__(self, space: FiniteSpace, sections: Mapping, restrictions: Mapping):
        self.space = space
        self.sections = {}
        for o in space.opens:
            if o not in sections:
                raise InvariantViolation("presheaf-sections-total", f"no sections at {set(o)!r}")
            self.sections[o] = tuple(sections[o])
        rest = {}
        for big in space.opens:
            for small in space.opens:
                if small <= big:
                    key = (big, small)
                    if key not in restrictions:
                        raise InvariantViolation(
                            "presheaf-restrictions-total",
                            f"no restriction {set(big)!r} → {set(small)!r}",
                        )
                    table = dict(restrictions[key])
                    for s in self.sections[big]:
                        if s not in table or table[s] not in self.sections[small]:
                            raise InvariantViolation(
                                "presheaf-restriction-ill-typed",
                                f"{set(big)!r} → {set(small)!r} at section {s!r}",
                            )
                    rest[key] = table
        for o in space.opens:
            for s in self.sections[o]:
                if rest[(o, o)][s] != s:
                    raise InvariantViolation("presheaf-identity-restriction", repr(set(o)))
        for big in space.opens:
            for mid in space.opens:
                if not mid <= big:
                    continue
                for small in space.opens:
                    if not small <= mid:
                        continue
                    for s in self.sections[big]:
                        if rest[(mid, small)][rest[(big, mid)][s]] != rest[(big, small)][s]:
                            raise InvariantViolation(
                                "presheaf-restriction-composition",
                                f"{set(big)!r} → {set(mid)!r} → {set(small)!r}",
                            )
        self.restrictions = rest

    def __eq__(self, other):
        return (
            isinstance(other, Presheaf)
            and self.space == other.space
            and self.sections == other.sections
            and self.restrictions == other.restrictions
        )

    def __hash__(self):
        return hash((self.space, tuple(sorted((repr(k), v) for k, v in self.sections.items()))))

    def restrict(self, big: Iterable, small: Iterable, section):
        return self.restrictions[(frozenset(big), frozenset(small))][section]

    def global_sections(self) -> tuple:
        return self.sections[self.space.full]

    @classmethod
    def representable(cls, space: FiniteSpace, target_open: Iterable) -> "Presheaf":
        """Hom(−, V): a single section exactly on the opens inside V."""
        v = frozenset(target_open)
        if not space.is_open(v):
            raise InvariantViolation("representable-not-open", repr(set(v)))
        sections = {o: ["*"] if o <= v else [] for o in space.opens}
        restrictions = {}
        for big in space.opens:
            for small in space.opens:
                if small <= big:
                    restrictions[(big, small)] = {"*": "*"} if big <= v else {}
        return cls(space, sections, restrictions)

    @classmethod
    def constant(cls, space: FiniteSpace, values: Iterable) -> "Presheaf":
        """The same value set at every open, identity restrictions."""
        values = tuple(values)
        sections = {o: values for o in space.opens}
        restrictions = {
            (big, small): {v: v for v in values}
            for big in space.opens
            for small in space.opens
            if small <= big
        }
        return cls(space, sections, restrictions)


class PresheafMap:
    """A natural transformation between presheaves on one space."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source: Presheaf, target: Presheaf, components: Mapping):
        if source.space != target.space:
            raise InvariantViolation("presheaf-map-space-mismatch")
        self.source = source
        self.target = target
        comp = {}
        for o in source.space.opens:
            if o not in components:
                raise InvariantViolation("presheaf-map-components-total", repr(set(o)))
            table = dict(components[o])
            for s in source.sections[o]:
                if s not in table or table[s] not in target.sections[o]:
                    raise InvariantViolation("presheaf-map-ill-typed", repr(set(o)))
            comp[o] = table
        for big in source.space.opens:
            for small in source.space.opens:
                if not small <= big:
                    continue
                for s in source.sections[big]:
                    down_then_map = comp[small][source.restrictions[(big, small)][s]]
                    map_then_down = target.restrictions[(big, small)][comp[big][s]]
                    if down_then_map != map_then_down:
                        raise InvariantViolation(
                            "presheaf-map-naturality",
                            f"square {set(big)!r} ⊇ {set(small)!r} at {s!r}",
                        )
        self.components = comp

    def apply(self, open_set: Iterable, section):
        return self.components[frozenset(open_set)][section]

    @classmethod
    def identity(cls, presheaf: Presheaf) -> "PresheafMap":
        return cls(
            presheaf,
            presheaf,
            {o: {s: s for s in presheaf.sections[o]} for o in presheaf.space.opens},
        )

    def compose(self, other: "PresheafMap") -> "PresheafMap":
        """self ∘ other (other first)."""
        if other.target is not self.source and other.target != self.source:
            raise InvariantViolation("presheaf-map-not-composable")
        comps = {
            o: {s: self.components[o][other.components[o][s]] for s in other.source.sections[o]}
            for o in self.source.space.opens
        }
        return PresheafMap(other.source, self.target, comps)


def matching_families(presheaf: Presheaf, diagram: AtlasDiagram, size_guard: int = 200_000) -> list:
    """Families (x_i ∈ F(U_i)) compatible under every index relation."""
    elems = list(diagram.index.elements)
    size = 1
    for e in elems:
        size *= max(len(presheaf.sections[diagram.assignment[e]]), 1)
        if size > size_guard:
            raise BoundExceeded("matching family enumeration too large")
    fams = []
    for combo in product(*[presheaf.sections[diagram.assignment[e]] for e in elems]):
        fam = dict(zip(elems, combo))
        ok = True
        for a in elems:
            for b in elems:
                if diagram.index.leq(a, b):
                    if presheaf.restrict(diagram.assignment[b], diagram.assignment[a], fam[b]) != fam[a]:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            fams.append(fam)
    return fams


def descent_check(presheaf: Presheaf, diagram: AtlasDiagram) -> bool:
    """F(X) → matching families over the index is a bijection."""
    covered = diagram.union_over(diagram.index.elements)
    if covered != presheaf.space.full:
        raise InvariantViolation("descent-diagram-not-covering")
    fams = matching_families(presheaf, diagram)
    elems = list(diagram.index.elements)
    full = presheaf.space.full
    images = set()
    for x in presheaf.global_sections():
        img = tuple(presheaf.restrict(full, diagram.assignment[e], x) for e in elems)
        if img in images:
            return False
        images.add(img)
    return images == {tuple(f[e] for e in elems) for f in fams}


def hypercover_descent_check(presheaf: Presheaf, H: "IndexedHypercover") -> bool:
    """F(X) equalizes the two face-restriction maps on level-0 sections."""
    if H.truncation < 1:
        raise InvariantViolation("hypercover-descent-needs-level-one")
    verts = list(H.shape.levels[0])
    edges = list(H.shape.levels[1])
    size = 1
    for v in verts:
        size *= max(len(presheaf.sections[H.labels[v]]), 1)
        if size > 200_000:
            raise BoundExceeded("equalizer enumeration too large")
    eq = set()
    for combo in product(*[presheaf.sections[H.labels[v]] for v in verts]):
        assign = dict(zip(verts, combo))
        ok = True
        for e in edges:
            v0 = H.shape.face(1, 0, e)
            v1 = H.shape.face(1, 1, e)
            if presheaf.restrict(H.labels[v0], H.labels[e], assign[v0]) != presheaf.restrict(
                H.labels[v1], H.labels[e], assign[v1]
            ):
                ok = False
                break
        if ok:
            eq.add(combo)
    full = presheaf.space.full
    images = set()
    for x in presheaf.global_sections():
        img = tuple(presheaf.restrict(full, H.labels[v], x) for v in verts)
        if img in images:
            return False
        images.add(img)
    return images == eq


def _minimal_covering_sieve(space: FiniteSpace, v: frozenset) -> list:
    """The smallest covering sieve of an open.

    It is the down-closure of the join-irreducible opens below v: every
    covering sieve contains each of those (a join-irreducible below a
    union must sit inside one member), and together they already cover.
    For v = ∅ the empty family covers, so the sieve is empty.
    """
    inside = [o for o in space.opens if o <= v]
    irreducible = []
    for o in inside:
        union = frozenset()
        for w in inside:
            if w < o:
                union |= w
        if union != o:
            irreducible.append(o)
    members = set()
    for o in irreducible:
        for w in inside:
            if w <= o:
                members.add(w)
    return sorted(members, key=lambda o: (len(o), sorted(map(repr, o))))


def sheafify(presheaf: Presheaf) -> tuple:
    """Plus construction iterated to a fixpoint.

    Returns (sheaf, unit) where unit: F → sheaf is the composite of the
    canonical maps.  Sections at V are matching families over the
    minimal covering sieve of V.
    """
    current = presheaf
    unit = PresheafMap.identity(presheaf)
    for _ in range(4):
        plus, step = _plus(current)
        stabilized = all(
            len(plus.sections[o]) == len(current.sections[o]) for o in current.space.opens
        ) and _is_iso(step)
        unit = step.compose(unit)
        current = plus
        if stabilized:
            break
    return current, unit


def _is_iso(psi: PresheafMap) -> bool:
    for o in psi.source.space.opens:
        vals = [psi.components[o][s] for s in psi.source.sections[o]]
        if len(set(vals)) != len(vals) or set(vals) != set(psi.target.sections[o]):
            return False
    return True


def _plus(presheaf: Presheaf) -> tuple:
    space = presheaf.space
    sieves = {v: _minimal_covering_sieve(space, v) for v in space.opens}
    new_sections = {}
    family_index = {}
    for v in space.opens:
        members = sieves[v]
        fams = []
        size = 1
        for o in members:
            size *= max(len(presheaf.sections[o]), 1)
            if size > 200_000:
                raise BoundExceeded("plus construction enumeration too large")
        for combo in product(*[presheaf.sections[o] for o in members]):
            fam = dict(zip(members, combo))
            ok = True
            for a in members:
                for b in members:
                    if a <= b and presheaf.restrict(b, a, fam[b]) != fam[a]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                fams.append(tuple(fam[o] for o in members))
        new_sections[v] = fams
        family_index[v] = members
    new_restrictions = {}
    for big in space.opens:
        for small in space.opens:
            if not small <= big:
                continue
            table = {}
            for fam in new_sections[big]:
                lookup = dict(zip(family_index[big], fam))
                table[fam] = tuple(lookup[o] for o in family_index[small])
            new_restrictions[(big, small)] = table
    plus = Presheaf(space, new_sections, new_restrictions)
    unit_components = {}
    for v in space.opens:
        members = family_index[v]
        unit_components[v] = {
            s: tuple(presheaf.restrict(v, o, s) for o in members)
            for s in presheaf.sections[v]
        }
    return plus, PresheafMap(presheaf, plus, unit_components)


def atlas_union_presheaf(diagram: AtlasDiagram) -> tuple:
    """The presheaf colimit of an atlas, with its map to the space's
    representable presheaf (Hom(−, X)).

    Sections at V are the connected components of {i : V ⊆ U_i}, the
    zigzag classes along the index order; the map collapses everything.
    """
    space = diagram.space
    index = diagram.index

    def components_at(v):
        hits = [e for e in index.elements if v <= diagram.assignment[e]]
        comp = {e: e for e in hits}

        def find(e):
            while comp[e] != e:
                comp[e] = comp[comp[e]]
                e = comp[e]
            return e

        for a in hits:
            for b in hits:
                if index.leq(a, b) or index.leq(b, a):
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        comp[ra] = rb
        classes = {}
        for e in hits:
            classes.setdefault(find(e), []).append(e)
        return {min(map(repr, cls)): tuple(cls) for cls in classes.values()}

    comps = {o: components_at(o) for o in space.opens}
    sections = {o: sorted(comps[o]) for o in space.opens}
    restrictions = {}
    for big in space.opens:
        for small in space.opens:
            if not small <= big:
                continue
            table = {}
            for name in sections[big]:
                rep = comps[big][name][0]
                target = next(
                    nm for nm, cls in comps[small].items() if rep in cls
                )
                table[name] = target
            restrictions[(big, small)] = table
    source = Presheaf(space, sections, restrictions)
    target = Presheaf.representable(space, space.full)
    psi = PresheafMap(
        source,
        target,
        {o: {s: "*" for s in source.sections[o]} for o in space.opens},
    )
    return source, psi


def is_local_isomorphism(psi: PresheafMap) -> bool:
    """For every open S and section y of the target at S, the diagram of
    pairs (V ⊆ S, lift of y|V through ψ) must be a site for S: the pairs
    cover S, their binary overlaps are covered by common refinements on
    which the lifts agree, and every open below S is a union of member
    opens."""
    space = psi.source.space
    for s_open in space.opens:
        for y in psi.target.sections[s_open]:
            pairs = []
            for v in space.opens:
                if not v <= s_open:
                    continue
                y_v = psi.target.restrictions[(s_open, v)][y]
                for x in psi.source.sections[v]:
                    if psi.components[v][x] == y_v:
                        pairs.append((v, x))
            union = frozenset()
            for v, _ in pairs:
                union |= v
            if union != s_open:
                return False
            # pairwise condition: the overlap of two lifts is covered by
            # opens on which their restrictions agree
            for v1, x1 in pairs:
                for v2, x2 in pairs:
                    overlap = v1 & v2
                    covered = frozenset()
                    for w, _ in pairs:
                        if w <= overlap and psi.source.restrictions[(v1, w)][
                            x1
                        ] == psi.source.restrictions[(v2, w)][x2]:
                            covered |= w
                    if covered != overlap:
                        return False
            # site condition: every open below S is a union of member opens
            for w in space.opens:
                if not w <= s_open:
                    continue
                u = frozenset()
                for v, _ in pairs:
                    if v <= w:
                        u |= v
                if u != w:
                    return False
    return True


def pullback_presheaf_map(psi: PresheafMap, phi: PresheafMap) -> tuple:
    """Pointwise fiber product of ψ: X → Y with φ: W → Y.

    Returns (P, projection to W, projection to X); the projection to W
    is the pullback of ψ.
    """
    if psi.target is not phi.target and psi.target != phi.target:
        raise InvariantViolation("pullback-targets-differ")
    space = psi.source.space
    sections = {}
    for o in space.opens:
        sections[o] = [
            (x, w)
            for x in psi.source.sections[o]
            for w in phi.source.sections[o]
            if psi.components[o][x] == phi.components[o][w]
        ]
    restrictions = {}
    for big in space.opens:
        for small in space.opens:
            if not small <= big:
                continue
            restrictions[(big, small)] = {
                (x, w): (
                    psi.source.restrictions[(big, small)][x],
                    phi.source.restrictions[(big, small)][w],
                )
                for (x, w) in sections[big]
            }
    P = Presheaf(space, sections, restrictions)
    to_w = PresheafMap(P, phi.source, {o: {(x, w): w for (x, w) in sections[o]} for o in space.opens})
    to_x = PresheafMap(P, psi.source, {o: {(x, w): x for (x, w) in sections[o]} for o in space.opens})
    return P, to_w, to_x


def natural_transformations(source: Presheaf, target: Presheaf, cap: int = 50_000) -> list:
    """All natural transformations source ⇒ target (both finite)."""
    space = source.space
    opens = sorted(space.opens, key=lambda o: (-len(o), sorted(map(repr, o))))
    out = []

    def rec(k, chosen):
        if len(out) > cap:
            raise BoundExceeded("too many natural transformations")
        if k == len(opens):
            out.append({o: dict(m) for o, m in chosen.items()})
            return
        o = opens[k]
        tables = [{}]
        for s in source.sections[o]:
            new_tables = []
            for t in tables:
                for val in target.sections[o]:
                    t2 = dict(t)
                    t2[s] = val
                    new_tables.append(t2)
            tables = new_tables
        for table in tables:
            ok = True
            for big, m in chosen.items():
                if o <= big:
                    for s in source.sections[big]:
                        if table[source.restrictions[(big, o)][s]] != target.restrictions[(big, o)][m[s]]:
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                chosen[o] = table
                rec(k + 1, chosen)
                del chosen[o]

    rec(0, {})
    return out


def is_local_for(presheaf: Presheaf, psi: PresheafMap) -> bool:
    """Precomposition with ψ bijects Hom(target, F) with Hom(source, F)."""
    homs_target = natural_transformations(psi.target, presheaf)
    homs_source = natural_transformations(psi.source, presheaf)
    order = sorted(presheaf.space.opens, key=lambda o: sorted(map(repr, o)))

    def key_of(components):
        return tuple(
            tuple((repr(s), repr(components[o][s])) for s in psi.source.sections[o])
            for o in order
        )

    composed = set()
    for eta in homs_target:
        comp = {
            o: {s: eta[o][psi.components[o][s]] for s in psi.source.sections[o]}
            for o in order
        }
        k = key_of(comp)
        if k in composed:
            return False
        composed.add(k)
    return composed == {key_of(eta) for eta in homs_source}
