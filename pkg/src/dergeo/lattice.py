"""Finite posets, sieves, the sieve lattice, and finite frames.

Posets are given by generating pairs (Hasse-style input); the constructor
takes the reflexive-transitive closure and rejects cycles.  Sieves are
stored as element subsets with a bitmask canonical form, bit k standing
for the k-th element in listing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import BoundExceeded, InvariantViolation

SIEVE_ENUMERATION_BOUND = 12


def label_key(x):
    """Deterministic sort key for opaque labels (mixed types allowed)."""
    return (type(x).__name__, repr(x))


def canon_points(points: Iterable) -> tuple:
    return tuple(sorted(points, key=label_key))


class FinitePoset:
    """A finite partially ordered set with opaque, unique element labels."""

    __slots__ = ("elements", "_index", "_down")

    def __init__(self, elements: Iterable, pairs: Iterable[tuple] = ()):
        elements = tuple(elements)
        if len(set(elements)) != len(elements):
            raise InvariantViolation("poset-labels-unique", "duplicate element label")
        self.elements = elements
        self._index = {e: k for k, e in enumerate(elements)}
        n = len(elements)
        down = [1 << k for k in range(n)]  # reflexive
        for a, b in pairs:
            if a not in self._index or b not in self._index:
                raise InvariantViolation("poset-unknown-element", f"pair ({a!r}, {b!r})")
            down[self._index[b]] |= 1 << self._index[a]
        # transitive closure (down[k] = everything below element k)
        changed = True
        while changed:
            changed = False
            for k in range(n):
                acc = down[k]
                m = acc
                while m:
                    j = (m & -m).bit_length() - 1
                    m &= m - 1
                    acc |= down[j]
                if acc != down[k]:
                    down[k] = acc
                    changed = True
        for i in range(n):
            for j in range(i + 1, n):
                if down[i] >> j & 1 and down[j] >> i & 1:
                    raise InvariantViolation(
                        "poset-antisymmetry",
                        f"{elements[i]!r} and {elements[j]!r} lie on a cycle",
                    )
        self._down = tuple(down)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, e):
        return e in self._index

    def __eq__(self, other):
        return (
            isinstance(other, FinitePoset)
            and self.elements == other.elements
            and self._down == other._down
        )

    def __hash__(self):
        return hash((self.elements, self._down))

    def __repr__(self):
        rels = [
            f"{a!r}<={b!r}"
            for j, b in enumerate(self.elements)
            for i, a in enumerate(self.elements)
            if i != j and self._down[j] >> i & 1
        ]
        return f"FinitePoset({list(self.elements)!r}, [{', '.join(rels)}])"

    def index(self, e) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise InvariantViolation("poset-unknown-element", repr(e)) from None

    def leq(self, a, b) -> bool:
        return bool(self._down[self.index(b)] >> self.index(a) & 1)

    def down_mask(self, e) -> int:
        return self._down[self.index(e)]

    def elements_of_mask(self, mask: int) -> tuple:
        return tuple(e for k, e in enumerate(self.elements) if mask >> k & 1)

    def mask_of(self, members: Iterable) -> int:
        m = 0
        for e in members:
            m |= 1 << self.index(e)
        return m

    def lower_bounds(self, a, b) -> tuple:
        return self.elements_of_mask(self.down_mask(a) & self.down_mask(b))

    def restrict(self, members: Iterable) -> "FinitePoset":
        members = tuple(e for e in self.elements if e in set(members))
        pairs = [(a, b) for a in members for b in members if self.leq(a, b)]
        return FinitePoset(members, pairs)


@dataclass(frozen=True)
class Sieve:
    """A downward-closed subset of a poset."""

    poset: FinitePoset
    members: frozenset

    def __post_init__(self):
        for e in self.members:
            self.poset.index(e)
        mask = self.poset.mask_of(self.members)
        for e in self.members:
            if self.poset.down_mask(e) & ~mask:
                raise InvariantViolation(
                    "sieve-downward-closed", f"{e!r} has predecessors outside the sieve"
                )

    @property
    def mask(self) -> int:
        return self.poset.mask_of(self.members)

    def __contains__(self, e):
        return e in self.members

    def __len__(self):
        return len(self.members)

    def meet(self, other: "Sieve") -> "Sieve":
        return Sieve(self.poset, self.members & other.members)

    def join(self, other: "Sieve") -> "Sieve":
        return Sieve(self.poset, self.members | other.members)


class FiniteSpace:
    """A finite set of points with an explicitly listed open-set family."""

    __slots__ = ("points", "opens", "_point_index", "_open_masks")

    def __init__(self, points: Iterable, opens: Iterable[Iterable]):
        self.points = canon_points(points)
        if len(set(self.points)) != len(self.points):
            raise InvariantViolation("space-points-unique", "duplicate point label")
        self._point_index = {p: k for k, p in enumerate(self.points)}
        fam = set()
        for o in opens:
            o = frozenset(o)
            for p in o:
                if p not in self._point_index:
                    raise InvariantViolation("space-open-outside-points", repr(p))
            fam.add(o)
        full = frozenset(self.points)
        if frozenset() not in fam:
            raise InvariantViolation("space-empty-open", "family lacks the empty set")
        if full not in fam:
            raise InvariantViolation("space-full-open", "family lacks the full point set")
        for a in fam:
            for b in fam:
                if a & b not in fam:
                    raise InvariantViolation(
                        "space-intersection-closed", f"{set(a)!r} ∩ {set(b)!r} missing"
                    )
                if a | b not in fam:
                    raise InvariantViolation(
                        "space-union-closed", f"{set(a)!r} ∪ {set(b)!r} missing"
                    )
        self.opens = frozenset(fam)
        self._open_masks = frozenset(self.mask_of(o) for o in fam)

    @classmethod
    def alexandrov(cls, points: Iterable, preorder_pairs: Iterable[tuple]) -> "FiniteSpace":
        """Alexandrov topology of a preorder: opens are the upward-closed sets.

        Pairs (a, b) mean a <= b in the specialization preorder, so every
        open containing a must contain b.
        """
        points = canon_points(points)
        idx = {p: k for k, p in enumerate(points)}
        up = [1 << k for k in range(len(points))]
        for a, b in preorder_pairs:
            up[idx[a]] |= 1 << idx[b]
        changed = True
        while changed:
            changed = False
            for k in range(len(points)):
                acc = up[k]
                m = acc
                while m:
                    j = (m & -m).bit_length() - 1
                    m &= m - 1
                    acc |= up[j]
                if acc != up[k]:
                    up[k] = acc
                    changed = True
        opens = []
        for mask in range(1 << len(points)):
            if all(not (mask >> k & 1) or (up[k] | mask) == mask for k in range(len(points))):
                opens.append([p for k, p in enumerate(points) if mask >> k & 1])
        return cls(points, opens)

    @classmethod
    def discrete(cls, points: Iterable) -> "FiniteSpace":
        points = tuple(points)
        masks = range(1 << len(points))
        return cls(points, [[p for k, p in enumerate(points) if m >> k & 1] for m in masks])

    @classmethod
    def indiscrete(cls, points: Iterable) -> "FiniteSpace":
        points = tuple(points)
        return cls(points, [[], list(points)])

    @property
    def full(self) -> frozenset:
        return frozenset(self.points)

    def is_open(self, s: Iterable) -> bool:
        return frozenset(s) in self.opens

    def mask_of(self, open_set: Iterable) -> int:
        m = 0
        for p in open_set:
            m |= 1 << self._point_index[p]
        return m

    def set_of_mask(self, mask: int) -> frozenset:
        return frozenset(p for k, p in enumerate(self.points) if mask >> k & 1)

    def opens_sorted(self) -> list:
        return sorted(self.opens, key=lambda o: (len(o), canon_points(o)))

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSpace)
            and self.points == other.points
            and self.opens == other.opens
        )

    def __hash__(self):
        return hash((self.points, self.opens))

    def __repr__(self):
        shown = [set(o) if o else "{}" for o in self.opens_sorted()]
        return f"FiniteSpace(points={list(self.points)!r}, opens={shown!r})"


def open_label(o: Iterable) -> tuple:
    """Canonical poset label for an open set (used by frame_of)."""
    return canon_points(o)


def downset(poset: FinitePoset, i) -> Sieve:
    """The smallest sieve containing i: all elements below it."""
    mask = poset.down_mask(i)
    return Sieve(poset, frozenset(poset.elements_of_mask(mask)))


def is_sieve(poset: FinitePoset, members: Iterable) -> bool:
    members = set(members)
    for e in members:
        poset.index(e)
    mask = poset.mask_of(members)
    return all(not (poset.down_mask(e) & ~mask) for e in members)


def sieve_lattice(poset: FinitePoset, bound: int = SIEVE_ENUMERATION_BOUND) -> list:
    """All sieves of the poset, in ascending-bitmask (canonical) order."""
    n = len(poset)
    if n > bound:
        raise BoundExceeded(f"sieve enumeration over {n} elements exceeds bound {bound}")
    out = []
    for mask in range(1 << n):
        ok = True
        m = mask
        while m:
            k = (m & -m).bit_length() - 1
            m &= m - 1
            if poset._down[k] & ~mask:
                ok = False
                break
        if ok:
            out.append(Sieve(poset, frozenset(poset.elements_of_mask(mask))))
    return out


def is_filtered(poset: FinitePoset) -> bool:
    """Downward directed and inhabited: every element pair has a lower bound.

    The empty poset does not count as filtered (the constant point diagram
    over it fails to cover the point).
    """
    if not len(poset):
        return False
    n = len(poset)
    return all(
        poset._down[i] & poset._down[j] for i in range(n) for j in range(i + 1, n)
    )


def frame_of(space: FiniteSpace) -> FinitePoset:
    """The open-set lattice as a poset ordered by inclusion.

    Elements are canonical point tuples of the opens.
    """
    opens = space.opens_sorted()
    labels = [open_label(o) for o in opens]
    pairs = []
    for a, la in zip(opens, labels):
        for b, lb in zip(opens, labels):
            if a <= b:
                pairs.append((la, lb))
    return FinitePoset(labels, pairs)
