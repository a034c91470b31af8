from itertools import combinations_with_replacement

import pytest

from dergeo.census import all_posets_up_to, all_topologies
from dergeo.errors import BoundExceeded, InvariantViolation
from dergeo.lattice import (
    FinitePoset,
    FiniteSpace,
    Sieve,
    downset,
    frame_of,
    is_filtered,
    is_sieve,
    sieve_lattice,
)


def chain(n):
    return FinitePoset(range(n), [(i, i + 1) for i in range(n - 1)])


def vee():
    # k below both arms
    return FinitePoset(["k", "a", "b"], [("k", "a"), ("k", "b")])


def brute_downset(poset, i):
    # independent oracle: scan the full relation
    return {j for j in poset.elements if poset.leq(j, i)}


class TestFinitePoset:
    def test_closure_and_leq(self):
        p = chain(3)
        assert p.leq(0, 2)  # transitivity from generating pairs
        assert not p.leq(2, 0)
        assert p.leq(1, 1)

    def test_cycle_rejected(self):
        with pytest.raises(InvariantViolation) as e:
            FinitePoset("ab", [("a", "b"), ("b", "a")])
        assert e.value.invariant == "poset-antisymmetry"

    def test_duplicate_labels_rejected(self):
        with pytest.raises(InvariantViolation):
            FinitePoset(["a", "a"])

    def test_restrict(self):
        p = chain(3)
        q = p.restrict([0, 2])
        assert q.leq(0, 2) and len(q) == 2


class TestDownset:
    def test_chain(self):
        assert downset(chain(3), 1).members == {0, 1}

    def test_antichain_singleton(self):
        p = FinitePoset("ab")
        assert downset(p, "a").members == {"a"}

    def test_vee_derived(self):
        p = vee()
        assert downset(p, "a").members == brute_downset(p, "a") == {"k", "a"}

    def test_unknown_element(self):
        with pytest.raises(InvariantViolation):
            downset(chain(2), 99)


class TestIsSieve:
    def test_chain_down(self):
        assert is_sieve(chain(2), {0})

    def test_chain_up_fails(self):
        assert not is_sieve(chain(2), {1})

    def test_empty(self):
        assert is_sieve(vee(), set())


class TestSieveLattice:
    def test_singleton_poset(self):
        sieves = sieve_lattice(FinitePoset(["x"]))
        assert [s.members for s in sieves] == [frozenset(), frozenset({"x"})]

    def test_antichain_count(self):
        p = FinitePoset("ab")
        expected = [S for m in range(4) for S in [{x for k, x in enumerate("ab") if m >> k & 1}] if is_sieve(p, S)]
        assert len(sieve_lattice(p)) == len(expected) == 4

    def test_chain_count(self):
        p = chain(2)
        assert [s.members for s in sieve_lattice(p)] == [
            frozenset(),
            frozenset({0}),
            frozenset({0, 1}),
        ]

    def test_bound(self):
        with pytest.raises(BoundExceeded):
            sieve_lattice(chain(13))


class TestIsFiltered:
    def test_chain(self):
        assert is_filtered(chain(3))

    def test_antichain(self):
        assert not is_filtered(FinitePoset("ab"))

    def test_vee_derived(self):
        p = vee()
        # oracle: pair scan over the relation
        oracle = all(
            any(p.leq(k, a) and p.leq(k, b) for k in p.elements)
            for a in p.elements
            for b in p.elements
        )
        assert is_filtered(p) is oracle is True

    def test_empty_not_filtered(self):
        assert not is_filtered(FinitePoset([]))


class TestFiniteSpace:
    def test_sierpinski_frame_is_chain(self):
        sp = FiniteSpace("ab", [[], ["a"], ["a", "b"]])
        fr = frame_of(sp)
        assert len(fr) == 3
        labels = fr.elements
        assert all(fr.leq(labels[i], labels[j]) for i in range(3) for j in range(i, 3))

    def test_discrete_two_points_boolean_frame(self):
        fr = frame_of(FiniteSpace.discrete("ab"))
        assert len(fr) == 4
        bot, a, b, top = fr.elements
        assert not fr.leq(a, b) and not fr.leq(b, a)
        assert fr.leq(bot, a) and fr.leq(a, top)

    def test_indiscrete_two_points(self):
        fr = frame_of(FiniteSpace.indiscrete("ab"))
        assert len(fr) == 2 and fr.leq(fr.elements[0], fr.elements[1])

    def test_missing_empty_open(self):
        with pytest.raises(InvariantViolation) as e:
            FiniteSpace("a", [["a"]])
        assert e.value.invariant == "space-empty-open"

    def test_not_intersection_closed(self):
        with pytest.raises(InvariantViolation) as e:
            FiniteSpace("abc", [[], ["a", "b"], ["b", "c"], ["a", "b", "c"]])
        assert e.value.invariant == "space-intersection-closed"

    def test_alexandrov_sierpinski(self):
        sp = FiniteSpace.alexandrov("ab", [("b", "a")])
        assert sp.opens == frozenset(
            {frozenset(), frozenset({"a"}), frozenset({"a", "b"})}
        )

    def test_non_alexandrov_expressible(self):
        # 3 points where {a} and {b} are open but not {a,b} alone: impossible
        # (union-closure), so instead: opens missing a point's minimal open
        sp = FiniteSpace("abc", [[], ["a"], ["a", "b", "c"]])
        assert len(sp.opens) == 3


class TestLatticeSweep:
    """Exhaustive invariants over all posets with |I| <= 5 (iso classes)."""

    def test_downsets_are_sieves_and_lattice_laws(self):
        posets = all_posets_up_to(5, include_empty=True)
        assert len(posets) == 1 + 1 + 2 + 5 + 16 + 63
        for p in posets:
            for e in p.elements:
                assert is_sieve(p, downset(p, e).members)
            sieves = sieve_lattice(p)
            masks = {s.mask for s in sieves}
            assert len(masks) == len(sieves)
            for a in sieves:
                for b in sieves:
                    assert a.mask & b.mask in masks
                    assert a.mask | b.mask in masks
            # distributivity, exhaustive over sieve triples (bitmask identity)
            mlist = sorted(masks)
            for x in mlist:
                for y, z in combinations_with_replacement(mlist, 2):
                    assert x & (y | z) == (x & y) | (x & z)

    def test_frames_satisfy_poset_invariants(self):
        for n in range(4):
            for sp in all_topologies(n):
                fr = frame_of(sp)
                by_label = {lbl: frozenset(lbl) for lbl in fr.elements}
                for la in fr.elements:
                    for lb in fr.elements:
                        assert fr.leq(la, lb) == (by_label[la] <= by_label[lb])
                # meets and joins agree with set intersection/union
                for la in fr.elements:
                    for lb in fr.elements:
                        meet = by_label[la] & by_label[lb]
                        join = by_label[la] | by_label[lb]
                        assert sp.is_open(meet) and sp.is_open(join)
