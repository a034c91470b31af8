"""The exhaustive property sweeps behind the acceptance gate, shared by
the test suite and the CLI.

Every sweep enumerates a deterministic instance family, counts
agreements, and carries the first counterexample as a replayable
witness.  Instance streams accept a shard filter so the CLI can fan the
work out over processes; aggregation is order-independent.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import jsonio
from .atlas import (
    AtlasDiagram,
    atlas_completion,
    is_atlas_cover_condition,
    is_atlas_meet_condition,
    tautological_atlas,
    trivial_atlas,
)
from .census import (
    all_posets_up_to,
    all_topologies,
    covering_antichains,
    enumerate_presheaves,
    monotone_assignments,
)
from .errors import BoundExceeded
from .polynomial import Polynomial
from .qsmooth import (
    CospanPresentation,
    PolynomialMap,
    RationalPoint,
    diagonal_point,
    diagonal_representation,
    hochschild_degeneracy,
    hochschild_face,
    hochschild_differential,
    hochschild_level,
    is_transverse,
    jet_mapping_complex,
    point_cospan,
    product_cospan,
    product_point,
    tangent_homology,
    virtual_dimension,
)
from .sheaf import (
    atlas_union_presheaf,
    descent_check,
    hypercover_descent_check,
    is_local_for,
    sheafify,
)
from .simplicial import (
    atlas_to_hypercover,
    iota_test,
    is_hypercover,
    sphere_filling_table,
)

SUITES = (
    "atlas-equiv",
    "hypercover-equiv",
    "sheaf-local",
    "transversality",
    "simplicial-identities",
)


@dataclass
class SweepResult:
    suite: str
    instances: int = 0
    agreements: int = 0
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.instances == self.agreements and self.counterexample is None

    def record(self, agrees: bool, witness_factory):
        self.instances += 1
        if agrees:
            self.agreements += 1
        elif self.counterexample is None:
            self.counterexample = witness_factory()

    def merge(self, other: "SweepResult") -> "SweepResult":
        merged = SweepResult(
            self.suite,
            self.instances + other.instances,
            self.agreements + other.agreements,
            self.counterexample if self.counterexample is not None else other.counterexample,
            {**other.details, **self.details},
        )
        return merged

    def to_json(self) -> dict:
        out = {
            "suite": self.suite,
            "instances": self.instances,
            "agree": self.agreements,
            "ok": self.ok,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.details:
            out["details"] = self.details
        return out


def _diagram_stream(max_points: int, max_poset: int, shard: int = 0, nshards: int = 1):
    """All monotone diagrams over poset iso-classes (the predicates are
    relabeling-equivariant) on all labeled topologies."""
    idx = 0
    posets = all_posets_up_to(max_poset, include_empty=True)
    for n in range(max_points + 1):
        for sp in all_topologies(n):
            for I in posets:
                for assignment in monotone_assignments(I, sp):
                    if idx % nshards == shard:
                        yield idx, AtlasDiagram(I, sp, assignment)
                    idx += 1


def sweep_atlas_equiv(max_points: int = 3, max_poset: int = 3, shard: int = 0, nshards: int = 1) -> SweepResult:
    """Pairwise-cover condition ⇔ sieve-extension meet condition."""
    result = SweepResult("atlas-equiv")
    for _, diagram in _diagram_stream(max_points, max_poset, shard, nshards):
        cover = is_atlas_cover_condition(diagram)
        meet = is_atlas_meet_condition(diagram)
        result.record(
            cover == meet,
            lambda d=diagram, c=cover, m=meet: {
                "atlas": jsonio.atlas_to_json(d),
                "cover_condition": c,
                "meet_condition": m,
            },
        )
    return result


def sweep_hypercover_equiv(max_points: int = 3, max_poset: int = 3, shard: int = 0, nshards: int = 1) -> SweepResult:
    """Atlas predicate ⇔ hypercover predicate of the refinement, with
    level-1 and level-2 verdicts agreeing."""
    result = SweepResult("hypercover-equiv")
    tables = {}
    for _, diagram in _diagram_stream(max_points, max_poset, shard, nshards):
        I = diagram.index
        if I not in tables:
            shape = iota_test(I, 2)
            tables[I] = sphere_filling_table(shape, 2)
        table = tables[I]
        atlas = is_atlas_cover_condition(diagram)
        H = atlas_to_hypercover(diagram, 2)
        h1 = is_hypercover(H, 1, table)
        h2 = is_hypercover(H, 2, table)
        result.record(
            atlas == h2 and h1 == h2,
            lambda d=diagram, a=atlas, x=h1, y=h2: {
                "atlas": jsonio.atlas_to_json(d),
                "is_atlas": a,
                "hypercover_level1": x,
                "hypercover_level2": y,
            },
        )
    return result


def _atlas_family(space):
    fam = [trivial_atlas(space)]
    if len(space.opens) <= 16:
        fam.append(tautological_atlas(space))
    for cover in covering_antichains(space):
        if len(cover) <= 3:
            fam.append(atlas_completion(space, cover))
    return fam


def sweep_sheaf_local(
    max_points: int = 3,
    max_card: int = 2,
    cap_three_point: int = 150,
    shard: int = 0,
    nshards: int = 1,
) -> SweepResult:
    """Descent for atlases ⇔ descent for hypercovers ⇔ locality for the
    generated local isomorphisms, per presheaf.

    Presheaves on spaces with up to 2 points are enumerated exhaustively;
    3-point frames use a deterministic capped family enriched with the
    canonical sheaf and non-sheaf examples.
    """
    result = SweepResult("sheaf-local")
    idx = 0
    for n in range(max_points + 1):
        for sp in all_topologies(n):
            cap = None if n <= 2 else cap_three_point
            presheaves = enumerate_presheaves(sp, max_card=max_card, cap=cap)
            if cap is not None:
                from .sheaf import Presheaf

                extras = [
                    Presheaf.constant(sp, ["s0", "s1"]),
                    Presheaf.representable(sp, sp.full),
                    sheafify(Presheaf.constant(sp, ["s0", "s1"]))[0],
                ]
                presheaves = presheaves + extras
            atlases = _atlas_family(sp)
            hypercovers = [atlas_to_hypercover(d, 2) for d in atlases]
            local_isos = [atlas_union_presheaf(d)[1] for d in atlases]
            for F in presheaves:
                if idx % nshards != shard:
                    idx += 1
                    continue
                idx += 1
                a = all(descent_check(F, d) for d in atlases)
                b = all(hypercover_descent_check(F, H) for H in hypercovers)
                c = all(is_local_for(F, psi) for psi in local_isos)
                result.record(
                    a == b == c,
                    lambda f=F, x=a, y=b, z=c: {
                        "presheaf": jsonio.presheaf_to_json(f),
                        "descent_atlases": x,
                        "descent_hypercovers": y,
                        "local_for_isos": z,
                    },
                )
    result.details["atlas_family"] = "trivial + tautological + completed antichain covers (≤3 members)"
    return result


def random_polynomial(rng: random.Random, nvars: int, max_degree: int = 2, terms: int = 3) -> Polynomial:
    coeffs: dict = {}
    for _ in range(terms):
        mono = [0] * nvars
        for _ in range(rng.randint(0, max_degree)):
            if nvars:
                mono[rng.randint(0, nvars - 1)] += 1
        key = tuple(mono)
        coeffs[key] = coeffs.get(key, Fraction(0)) + Fraction(
            rng.randint(-3, 3), rng.randint(1, 2)
        )
    return Polynomial(nvars, coeffs)


def random_cospan_with_point(rng: random.Random, max_source: int = 2, max_target: int = 2):
    """A cospan with a planted rational intersection point: component
    constants are adjusted so both legs agree at the chosen coordinates."""
    a = rng.randint(0, max_source)
    b = rng.randint(0, max_source)
    c = rng.randint(1, max_target)
    x = [Fraction(rng.randint(-2, 2), rng.randint(1, 2)) for _ in range(a)]
    y = [Fraction(rng.randint(-2, 2), rng.randint(1, 2)) for _ in range(b)]
    target = [Fraction(rng.randint(-2, 2), rng.randint(1, 2)) for _ in range(c)]
    left = []
    for i in range(c):
        p = random_polynomial(rng, a)
        left.append(p - p.evaluate(x) + target[i])
    right = []
    for i in range(c):
        p = random_polynomial(rng, b)
        right.append(p - p.evaluate(y) + target[i])
    cospan = CospanPresentation(
        PolynomialMap(a, c, left), PolynomialMap(b, c, right)
    )
    return cospan, RationalPoint(cospan, x, y)


def sweep_transversality(corpus: int = 50, seed: int = 7, shard: int = 0, nshards: int = 1) -> SweepResult:
    """On a seeded corpus with planted points: transversality ⇔ vanishing
    degree -1 homology, Euler characteristic ⇔ virtual dimension, product
    additivity on consecutive corpus pairs, and agreement of the diagonal
    representation pointwise."""
    result = SweepResult("transversality")
    rng = random.Random(seed)
    instances = [random_cospan_with_point(rng) for _ in range(corpus)]
    for k, (cospan, point) in enumerate(instances):
        if k % nshards != shard:
            continue
        h0, h1 = tangent_homology(cospan, point)
        transverse = is_transverse(cospan, point)
        euler_ok = h0 - h1 == virtual_dimension(cospan)
        conc_ok = transverse == (h1 == 0)
        partner = instances[(k + 1) % len(instances)]
        prod = product_cospan(cospan, partner[0])
        additivity_ok = virtual_dimension(prod) == virtual_dimension(
            cospan
        ) + virtual_dimension(partner[0])
        ph = tangent_homology(prod, product_point(prod, point, partner[1]))
        sum_ok = ph == (
            h0 + tangent_homology(*partner)[0],
            h1 + tangent_homology(*partner)[1],
        )
        diag = diagonal_representation(cospan)
        dpt = diagonal_point(cospan, point)
        diag_ok = (
            virtual_dimension(diag) == virtual_dimension(cospan)
            and is_transverse(diag, dpt) == transverse
            and tangent_homology(diag, dpt) == (h0, h1)
        )
        result.record(
            euler_ok and conc_ok and additivity_ok and sum_ok and diag_ok,
            lambda cp=cospan, pt=point, t=transverse, h=(h0, h1): {
                "cospan": _cospan_json(cp),
                "point": {"x": [str(v) for v in pt.x], "y": [str(v) for v in pt.y]},
                "transverse": t,
                "homology": list(h),
            },
        )
    result.details["seed"] = seed
    return result


def _cospan_json(cospan: CospanPresentation) -> dict:
    from .polynomial import poly_to_string

    return {
        "left": {
            "vars": cospan.left.source_dim,
            "polys": [poly_to_string(p) for p in cospan.left.components],
        },
        "right": {
            "vars": cospan.right.source_dim,
            "polys": [poly_to_string(p) for p in cospan.right.components],
        },
    }


def sweep_simplicial_identities(
    max_poset: int = 3,
    truncation: int = 3,
    hochschild_top: int = 4,
    seed: int = 7,
    shard: int = 0,
    nshards: int = 1,
) -> SweepResult:
    """Simplicial identities for the refinement shapes of all small
    posets, symbolic Hochschild identities on generators through the top
    level, d∘d = 0 for the alternating differential, and exact matrix
    identities on constructed jet complexes."""
    result = SweepResult("simplicial-identities")
    idx = 0
    for I in all_posets_up_to(max_poset, include_empty=True):
        if idx % nshards == shard:
            shape = iota_test(I, truncation)
            ok = True
            witness = None
            try:
                shape.validate()
            except Exception as err:  # noqa: BLE001 - report, don't crash the sweep
                ok = False
                witness = {"poset": jsonio.poset_to_json(I), "error": str(err)}
            result.record(ok, lambda w=witness: w)
        idx += 1

    rng = random.Random(seed)
    cospans = [point_cospan()]
    for _ in range(2):
        cospans.append(random_cospan_with_point(rng)[0])
    for cospan in cospans:
        for n in range(hochschild_top - 1):
            if idx % nshards != shard:
                idx += 1
                continue
            idx += 1
            nv = hochschild_level(cospan, n + 2).nvars
            gens = [Polynomial.variable(nv, k) for k in range(nv)]
            ok = True
            for j in range(n + 3):
                for i in range(j):
                    for g in gens:
                        lhs = hochschild_face(cospan, n, i, hochschild_face(cospan, n + 1, j, g))
                        rhs = hochschild_face(cospan, n, j - 1, hochschild_face(cospan, n + 1, i, g))
                        if lhs != rhs:
                            ok = False
            nv_n = hochschild_level(cospan, n).nvars
            for g in [Polynomial.variable(nv_n, k) for k in range(nv_n)]:
                for j in range(n + 1):
                    for i in range(n + 2):
                        lhs = hochschild_face(cospan, n, i, hochschild_degeneracy(cospan, n, j, g))
                        if i in (j, j + 1):
                            rhs = g
                        elif i < j:
                            rhs = hochschild_degeneracy(cospan, n - 1, j - 1, hochschild_face(cospan, n - 1, i, g))
                        else:
                            rhs = hochschild_degeneracy(cospan, n - 1, j, hochschild_face(cospan, n - 1, i - 1, g))
                        if lhs != rhs:
                            ok = False
            nv2 = hochschild_level(cospan, n + 2).nvars
            gens2 = [Polynomial.variable(nv2, k) for k in range(nv2)]
            for g in gens2:
                dd = hochschild_differential(cospan, n, hochschild_differential(cospan, n + 1, g))
                if not dd.is_zero():
                    ok = False
            result.record(
                ok,
                lambda cp=cospan, lvl=n: {
                    "cospan": _cospan_json(cp),
                    "level": lvl,
                    "error": "hochschild identity failure",
                },
            )

    rng2 = random.Random(seed + 1)
    jet_instances = [(point_cospan(), RationalPoint(point_cospan(), [], []))]
    for _ in range(2):
        jet_instances.append(random_cospan_with_point(rng2))
    for cospan, point in jet_instances:
        if idx % nshards != shard:
            idx += 1
            continue
        idx += 1
        ok = True
        witness = None
        try:
            sv = jet_mapping_complex(cospan, point, 2, 3, 1, validate=False)
            sv.validate()
            # alternating-sum differentials square to zero on jets
            from .linalg import mat_is_zero, mat_mul, zero_matrix

            moore = []
            for lvl in range(1, sv.levels):
                total = zero_matrix(sv.dims[lvl - 1], sv.dims[lvl])
                for i in range(lvl + 1):
                    sign = 1 if i % 2 == 0 else -1
                    total = tuple(
                        tuple(t + sign * x for t, x in zip(trow, mrow))
                        for trow, mrow in zip(total, sv.faces[(lvl, i)])
                    )
                moore.append(total)
            for k in range(len(moore) - 1):
                if not mat_is_zero(mat_mul(moore[k], moore[k + 1])):
                    ok = False
                    witness = {"cospan": _cospan_json(cospan), "error": "moore d∘d ≠ 0"}
        except BoundExceeded:
            continue
        except Exception as err:  # noqa: BLE001
            ok = False
            witness = {"cospan": _cospan_json(cospan), "error": str(err)}
        result.record(ok, lambda w=witness: w)
    return result


def run_sweep(suite: str, **kwargs) -> SweepResult:
    if suite == "atlas-equiv":
        return sweep_atlas_equiv(
            max_points=kwargs.get("points", 3),
            max_poset=kwargs.get("poset", 3),
            shard=kwargs.get("shard", 0),
            nshards=kwargs.get("nshards", 1),
        )
    if suite == "hypercover-equiv":
        return sweep_hypercover_equiv(
            max_points=kwargs.get("points", 3),
            max_poset=kwargs.get("poset", 3),
            shard=kwargs.get("shard", 0),
            nshards=kwargs.get("nshards", 1),
        )
    if suite == "sheaf-local":
        return sweep_sheaf_local(
            max_points=kwargs.get("points", 3),
            max_card=kwargs.get("max_card", 2),
            shard=kwargs.get("shard", 0),
            nshards=kwargs.get("nshards", 1),
        )
    if suite == "transversality":
        return sweep_transversality(
            corpus=kwargs.get("corpus", 50),
            seed=kwargs.get("seed", 7),
            shard=kwargs.get("shard", 0),
            nshards=kwargs.get("nshards", 1),
        )
    if suite == "simplicial-identities":
        return sweep_simplicial_identities(
            max_poset=kwargs.get("poset", 3),
            truncation=kwargs.get("truncation", 3),
            seed=kwargs.get("seed", 7),
            shard=kwargs.get("shard", 0),
            nshards=kwargs.get("nshards", 1),
        )
    raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
