import pytest

from dergeo.atlas import (
    AtlasDiagram,
    ContinuousMap,
    atlas_completion,
    compose_atlases,
    eta_is_left_exact,
    inclusion_atlas,
    is_atlas,
    is_atlas_cover_condition,
    is_atlas_meet_condition,
    is_site,
    pullback_atlas,
    restrict_to_sieve,
    subordinate,
    subspace,
    tautological_atlas,
    trivial_atlas,
)
from dergeo.census import all_posets_up_to, all_topologies, monotone_assignments
from dergeo.errors import InvariantViolation
from dergeo.lattice import FinitePoset, FiniteSpace, Sieve, downset, sieve_lattice

D2 = FiniteSpace.discrete([1, 2])
PT = FiniteSpace.discrete(["*"])


def antichain(labels):
    return FinitePoset(labels)


def vee():
    return FinitePoset(["k", "i", "j"], [("k", "i"), ("k", "j")])


class TestAtlasPredicates:
    def test_disjoint_cover_is_atlas(self):
        d = AtlasDiagram(antichain("ij"), D2, {"i": {1}, "j": {2}})
        assert is_atlas_cover_condition(d)

    def test_double_full_antichain_fails(self):
        d = AtlasDiagram(antichain("ij"), D2, {"i": {1, 2}, "j": {1, 2}})
        assert not is_atlas_cover_condition(d)

    def test_vee_with_intersection_member(self):
        sp = FiniteSpace([1, 2, 3], [[], [1, 2], [2, 3], [2], [1, 2, 3]])
        d = AtlasDiagram(
            vee(), sp, {"i": {1, 2}, "j": {2, 3}, "k": {2}}
        )
        assert is_atlas_cover_condition(d)

    def test_monotonicity_enforced(self):
        with pytest.raises(InvariantViolation) as e:
            AtlasDiagram(
                FinitePoset("ab", [("a", "b")]), D2, {"a": {1, 2}, "b": {1}}
            )
        assert e.value.invariant == "atlas-assignment-monotone"

    def test_trivial_and_tautological_meet_condition(self):
        for sp in (D2, PT, FiniteSpace("ab", [[], ["a"], ["a", "b"]])):
            assert is_atlas_meet_condition(trivial_atlas(sp))
            assert is_atlas_meet_condition(tautological_atlas(sp))

    def test_meet_condition_cross_checks_cover_condition(self):
        d = AtlasDiagram(antichain("ij"), D2, {"i": {1}, "j": {2}})
        assert is_atlas_meet_condition(d)
        bad = AtlasDiagram(antichain("ij"), D2, {"i": {1, 2}, "j": {1, 2}})
        assert not is_atlas_meet_condition(bad)


class TestSite:
    def test_tautological_is_site(self):
        assert is_site(tautological_atlas(D2))

    def test_basis_iff_unions(self):
        sp = FiniteSpace.discrete([1, 2])
        basis = inclusion_atlas(sp, [{1}, {2}])
        assert is_site(basis)
        not_basis = inclusion_atlas(
            FiniteSpace([1, 2, 3], [[], [1], [2, 3], [1, 2, 3]]),
            [{1}, {1, 2, 3}],
        )
        assert not is_site(not_basis)  # {2,3} is not a union of members

    def test_disjoint_cover_of_discrete_two_points(self):
        d = AtlasDiagram(antichain("ij"), D2, {"i": {1}, "j": {2}})
        assert is_site(d)


class TestCompletion:
    def test_single_member(self):
        d = atlas_completion(D2, [D2.full])
        assert len(d.index) == 1 and is_atlas_cover_condition(d)

    def test_two_members(self):
        sp = FiniteSpace([1, 2, 3], [[], [1, 2], [2, 3], [2], [1, 2, 3]])
        d = atlas_completion(sp, [{1, 2}, {2, 3}])
        assert len(d.index) == 3
        assert d.assignment[(0, 1)] == frozenset({2})
        assert is_atlas_cover_condition(d)

    def test_three_members_seven_indices(self):
        sp = FiniteSpace.discrete([1, 2, 3])
        d = atlas_completion(sp, [{1}, {2}, {3}])
        assert len(d.index) == 7
        assert is_atlas_cover_condition(d)

    def test_not_covering(self):
        with pytest.raises(InvariantViolation):
            atlas_completion(D2, [{1}])


class TestPullback:
    def test_identity(self):
        d = tautological_atlas(D2)
        res = pullback_atlas(ContinuousMap.identity(D2), d)
        assert res.input_was_atlas
        assert res.diagram.assignment == d.assignment

    def test_constant_map_filtered_atlas(self):
        const = ContinuousMap(D2, PT, {1: "*", 2: "*"})
        idx = FinitePoset("abc", [("a", "b"), ("a", "c")])  # filtered
        d = AtlasDiagram(idx, PT, {e: {"*"} for e in "abc"})
        assert is_atlas_cover_condition(d)
        res = pullback_atlas(const, d)
        assert res.input_was_atlas and is_atlas_cover_condition(res.diagram)
        assert all(res.diagram.assignment[e] == frozenset({1, 2}) for e in "abc")

    def test_open_inclusion_of_tautological(self):
        sp = FiniteSpace([1, 2, 3], [[], [1], [1, 2], [1, 2, 3]])
        sub = subspace(sp, {1, 2})
        inc = ContinuousMap(sub, sp, {1: 1, 2: 2})
        res = pullback_atlas(inc, tautological_atlas(sp))
        assert res.input_was_atlas and is_atlas_cover_condition(res.diagram)
        # every open of the subspace is hit, so the pullback is again a site
        assert is_site(res.diagram)

    def test_non_atlas_flagged(self):
        d = AtlasDiagram(antichain("ij"), D2, {"i": {1, 2}, "j": {1, 2}})
        res = pullback_atlas(ContinuousMap.identity(D2), d)
        assert not res.input_was_atlas


class TestRestrictToSieve:
    def test_whole_sieve(self):
        d = tautological_atlas(D2)
        whole = Sieve(d.index, frozenset(d.index.elements))
        r = restrict_to_sieve(d, whole)
        assert r.space == D2 and is_atlas_cover_condition(r)

    def test_empty_sieve(self):
        d = tautological_atlas(D2)
        r = restrict_to_sieve(d, Sieve(d.index, frozenset()))
        assert r.space.points == () and is_atlas_cover_condition(r)

    def test_downset_gives_atlas_of_member(self):
        sp = FiniteSpace([1, 2, 3], [[], [1, 2], [2, 3], [2], [1, 2, 3]])
        d = AtlasDiagram(vee(), sp, {"i": {1, 2}, "j": {2, 3}, "k": {2}})
        r = restrict_to_sieve(d, downset(d.index, "i"))
        assert r.space.points == (1, 2)
        assert is_atlas_cover_condition(r)


class TestComposition:
    def test_top_sieve_returns_same_opens(self):
        sp = FiniteSpace([1, 2, 3], [[], [1, 2], [2, 3], [2], [1, 2, 3]])
        d = AtlasDiagram(vee(), sp, {"i": {1, 2}, "j": {2, 3}, "k": {2}})
        J = FinitePoset(["*"])
        out = compose_atlases(d, J, {"*": frozenset(d.index.elements)})
        assert sorted(out.index.elements) == [("i", "*"), ("j", "*"), ("k", "*")]
        assert is_atlas_cover_condition(out)
        assert all(out.assignment[(i, "*")] == d.assignment[i] for i in "ijk")

    def test_left_exactness_failure_is_error(self):
        d = AtlasDiagram(antichain("ij"), D2, {"i": {1}, "j": {2}})
        J = FinitePoset("ab")
        eta = {"a": frozenset("i"), "b": frozenset("j")}
        # eta misses nothing unionwise but pairwise meets fail: meet of the
        # two sieves is empty = union below, so this eta IS left exact;
        # break it instead by making values non-monotone over a chain
        J2 = FinitePoset("ab", [("a", "b")])
        eta2 = {"a": frozenset({"i", "j"}), "b": frozenset({"i"})}
        with pytest.raises(InvariantViolation) as e:
            compose_atlases(d, J2, eta2)
        assert e.value.invariant == "composition-eta-not-left-exact"

    def test_exhaustive_small_search(self):
        # over all posets |I|,|J| <= 3 and sieve-valued maps satisfying the
        # hypotheses on a fixed 2-point space, the output passes the predicate
        spaces = [D2, FiniteSpace("ab", [[], ["a"], ["a", "b"]])]
        posets = all_posets_up_to(2)
        checked = 0
        for sp in spaces:
            for I in posets:
                for assignment in monotone_assignments(I, sp):
                    d = AtlasDiagram(I, sp, assignment)
                    if not is_atlas_cover_condition(d):
                        continue
                    sieves = sieve_lattice(I)
                    for J in posets:
                        for eta_choice in _eta_candidates(J, sieves):
                            eta = {j: sieves[k].members for j, k in zip(J.elements, eta_choice)}
                            if not eta_is_left_exact(I, J, eta):
                                continue
                            try:
                                out = compose_atlases(d, J, eta)
                            except InvariantViolation:
                                continue
                            assert is_atlas_cover_condition(out)
                            checked += 1
        assert checked > 10

    def test_subordinate_trivial_atlas_returns_site(self):
        u = tautological_atlas(D2)
        v = trivial_atlas(D2)
        out = subordinate(u, v)
        assert is_site(out)
        # index pairs (i, '*') reproduce U up to index isomorphism
        assert len(out.index) == len(u.index)

    def test_subordinate_tautological_to_atlas(self):
        u = tautological_atlas(D2)
        v = AtlasDiagram(antichain("ij"), D2, {"i": {1}, "j": {2}})
        out = subordinate(u, v)
        assert is_site(out)
        # every member open is inside the witness member of v
        for (lbl, j) in out.index.elements:
            assert out.assignment[(lbl, j)] <= v.assignment[j]

    def test_subordinate_tautological_to_itself(self):
        u = tautological_atlas(D2)
        out = subordinate(u, u)
        assert is_site(out)
        assert len(out.index) == sum(
            1
            for a in u.index.elements
            for b in u.index.elements
            if frozenset(a) <= frozenset(b)
        )


def _eta_candidates(J, sieves):
    from itertools import product

    return product(range(len(sieves)), repeat=len(J.elements))


class TestEquivalenceSweep:
    """Predicate equivalence: cover condition ⇔ meet condition, plus the
    universality, descent and heredity properties, over an enumerated
    family (all ≤3-point topologies × poset iso-classes |I| ≤ 3; the
    predicates are relabeling-equivariant)."""

    def _instances(self, max_points=3, max_poset=3):
        for n in range(max_points + 1):
            for sp in all_topologies(n):
                for I in all_posets_up_to(max_poset, include_empty=True):
                    for assignment in monotone_assignments(I, sp):
                        yield AtlasDiagram(I, sp, assignment)

    def test_cover_iff_meet(self):
        count = 0
        for d in self._instances(max_points=2, max_poset=3):
            assert is_atlas_cover_condition(d) == is_atlas_meet_condition(d)
            count += 1
        assert count > 400

    def test_universality_pullbacks_are_atlases(self):
        # all continuous maps between small spaces, pulled back atlases
        import itertools

        spaces = [sp for n in range(3) for sp in all_topologies(n)]
        checked = 0
        for src in spaces:
            for tgt in spaces:
                for vals in itertools.product(tgt.points, repeat=len(src.points)):
                    try:
                        f = ContinuousMap(src, tgt, dict(zip(src.points, vals)))
                    except InvariantViolation:
                        continue
                    for I in all_posets_up_to(2):
                        for assignment in monotone_assignments(I, tgt):
                            d = AtlasDiagram(I, tgt, assignment)
                            if not is_atlas_cover_condition(d):
                                continue
                            res = pullback_atlas(f, d)
                            assert res.input_was_atlas
                            assert is_atlas_cover_condition(res.diagram)
                            for e in I.elements:
                                assert res.diagram.assignment[e] == f.preimage(
                                    d.assignment[e]
                                )
                            checked += 1
        assert checked > 100

    def test_descent_for_open_immersions(self):
        # Cartesian families V_i = U_i ∩ W for an open W form atlases of W
        for d in self._instances(max_points=2, max_poset=2):
            if not is_atlas_cover_condition(d):
                continue
            for w in d.space.opens:
                sub = subspace(d.space, w)
                v = AtlasDiagram(
                    d.index, sub, {e: d.assignment[e] & w for e in d.index.elements}
                )
                # Cartesian: V_i ∩ U_j = V_j for j <= i
                for i in d.index.elements:
                    for j in d.index.elements:
                        if d.index.leq(j, i):
                            assert v.assignment[i] & d.assignment[j] == v.assignment[j]
                assert is_atlas_cover_condition(v)

    def test_heredity(self):
        for d in self._instances(max_points=2, max_poset=3):
            if not is_atlas_cover_condition(d):
                continue
            for s in sieve_lattice(d.index):
                assert is_atlas_cover_condition(restrict_to_sieve(d, s))

    def test_larger_instances_sampled(self):
        # spaces with up to 5 points and 8 opens, indices up to 4 elements
        # (seeded deterministic family; the small family is exhaustive)
        from dergeo.census import sampled_topologies

        count = 0
        for n_points in (4, 5):
            for sp in sampled_topologies(n_points, max_opens=8, count=8):
                for I in all_posets_up_to(4):
                    assignments = list(monotone_assignments(I, sp))
                    for assignment in assignments[:: max(1, len(assignments) // 12)]:
                        d = AtlasDiagram(I, sp, assignment)
                        assert is_atlas_cover_condition(d) == is_atlas_meet_condition(d)
                        if is_atlas_cover_condition(d):
                            for s in sieve_lattice(d.index):
                                assert is_atlas_cover_condition(restrict_to_sieve(d, s))
                        count += 1
        assert count > 1000
