"""JSON schemas for the file formats the CLI consumes and emits.

Loaders validate through the library constructors, so malformed input
reports the violated invariant by name.  Serialization uses canonical
orderings throughout (sorted points, stringified labels, stable simplex
ids) so reports are byte-deterministic.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction

from .atlas import AtlasDiagram, ContinuousMap
from .errors import InvariantViolation
from .lattice import FinitePoset, FiniteSpace, canon_points
from .polynomial import parse_polynomial, parse_rational
from .qsmooth import CospanPresentation, PolynomialMap, RationalPoint
from .sheaf import Presheaf, PresheafMap
from .simplicial import IndexedHypercover, TruncatedSimplicialSet


def _require(data, key, kind, where):
    if not isinstance(data, dict) or key not in data:
        raise InvariantViolation("json-missing-field", f"{where} needs {key!r}")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise InvariantViolation("json-bad-field", f"{where}.{key} has the wrong type")
    return value


# -- spaces and posets ------------------------------------------------------


def space_from_json(data) -> FiniteSpace:
    points = _require(data, "points", list, "space")
    opens = _require(data, "opens", list, "space")
    return FiniteSpace(points, opens)


def space_to_json(space: FiniteSpace) -> dict:
    return {
        "points": list(space.points),
        "opens": [sorted(o, key=lambda p: (type(p).__name__, repr(p))) for o in space.opens_sorted()],
    }


def poset_from_json(data) -> FinitePoset:
    elements = _require(data, "elements", list, "poset")
    pairs = _require(data, "leq", list, "poset")
    for pr in pairs:
        if not isinstance(pr, list) or len(pr) != 2:
            raise InvariantViolation("json-bad-field", "poset.leq entries must be pairs")
    return FinitePoset(elements, [tuple(pr) for pr in pairs])


def poset_to_json(poset: FinitePoset) -> dict:
    return {
        "elements": [_label(e) for e in poset.elements],
        "leq": [
            [_label(a), _label(b)]
            for b in poset.elements
            for a in poset.elements
            if a != b and poset.leq(a, b)
        ],
    }


def _label(e):
    return e if isinstance(e, (str, int)) else repr(e)


# -- atlases ----------------------------------------------------------------


def atlas_from_json(data) -> AtlasDiagram:
    space = space_from_json(_require(data, "space", dict, "atlas"))
    index = poset_from_json(_require(data, "index", dict, "atlas"))
    raw = _require(data, "assignment", dict, "atlas")
    assignment = {}
    by_str = {str(_label(e)): e for e in index.elements}
    for key, points in raw.items():
        if key not in by_str:
            raise InvariantViolation("atlas-assignment-total", f"unknown index label {key!r}")
        assignment[by_str[key]] = points
    return AtlasDiagram(index, space, assignment)


def atlas_to_json(diagram: AtlasDiagram) -> dict:
    return {
        "space": space_to_json(diagram.space),
        "index": poset_to_json(diagram.index),
        "assignment": {
            str(_label(e)): sorted(diagram.assignment[e], key=lambda p: (type(p).__name__, repr(p)))
            for e in diagram.index.elements
        },
    }


def map_from_json(data) -> ContinuousMap:
    source = space_from_json(_require(data, "source", dict, "map"))
    target = space_from_json(_require(data, "target", dict, "map"))
    raw = _require(data, "point_map", dict, "map")
    by_str = {str(p): p for p in source.points}
    tgt_by_str = {str(p): p for p in target.points}
    pm = {}
    for k, v in raw.items():
        if k not in by_str:
            raise InvariantViolation("map-not-total", f"unknown source point {k!r}")
        pm[by_str[k]] = tgt_by_str.get(str(v), v)
    return ContinuousMap(source, target, pm)


# -- hypercovers ------------------------------------------------------------


def simplex_id(simplex) -> str:
    digest = hashlib.sha256(repr(simplex).encode()).hexdigest()
    return digest[:12]


def hypercover_to_json(H: IndexedHypercover) -> dict:
    shape = H.shape
    ids = {}
    for lvl in shape.levels:
        for s in lvl:
            ids[s] = simplex_id(s)
    return {
        "space": space_to_json(H.space),
        "truncation": shape.truncation,
        "levels": [
            {
                "simplices": [ids[s] for s in lvl],
                "labels": {
                    ids[s]: sorted(H.labels[s], key=lambda p: (type(p).__name__, repr(p)))
                    for s in lvl
                },
            }
            for lvl in shape.levels
        ],
        "faces": {
            f"{n},{i}": {ids[s]: ids[t] for s, t in fmap.items()}
            for (n, i), fmap in sorted(shape.faces.items())
        },
        "degeneracies": {
            f"{n},{j}": {ids[s]: ids[t] for s, t in dmap.items()}
            for (n, j), dmap in sorted(shape.degeneracies.items())
        },
    }


def hypercover_from_json(data) -> IndexedHypercover:
    space = space_from_json(_require(data, "space", dict, "hypercover"))
    levels_raw = _require(data, "levels", list, "hypercover")
    truncation = _require(data, "truncation", int, "hypercover")
    levels = [list(entry["simplices"]) for entry in levels_raw]
    labels = {}
    for entry in levels_raw:
        for sid, pts in entry["labels"].items():
            labels[sid] = frozenset(pts)
    faces = {}
    for key, table in _require(data, "faces", dict, "hypercover").items():
        n, i = (int(x) for x in key.split(","))
        faces[(n, i)] = dict(table)
    degeneracies = {}
    for key, table in _require(data, "degeneracies", dict, "hypercover").items():
        n, j = (int(x) for x in key.split(","))
        degeneracies[(n, j)] = dict(table)
    shape = TruncatedSimplicialSet(truncation, levels, faces, degeneracies)
    shape.validate()
    return IndexedHypercover(shape, space, labels)


# -- presheaves -------------------------------------------------------------


def open_id(open_set) -> str:
    return ",".join(str(p) for p in canon_points(open_set))


def presheaf_to_json(F: Presheaf) -> dict:
    space = F.space
    return {
        "space": space_to_json(space),
        "sections": {
            open_id(o): [str(s) for s in F.sections[o]] for o in space.opens_sorted()
        },
        "restrictions": {
            f"{open_id(big)}|{open_id(small)}": {
                str(s): str(F.restrictions[(big, small)][s]) for s in F.sections[big]
            }
            for big in space.opens_sorted()
            for small in space.opens_sorted()
            if small <= big
        },
    }


def presheaf_from_json(data) -> Presheaf:
    space = space_from_json(_require(data, "space", dict, "presheaf"))
    by_id = {open_id(o): o for o in space.opens}
    sections = {}
    for oid, secs in _require(data, "sections", dict, "presheaf").items():
        if oid not in by_id:
            raise InvariantViolation("presheaf-unknown-open", oid)
        sections[by_id[oid]] = list(secs)
    restrictions = {}
    for key, table in _require(data, "restrictions", dict, "presheaf").items():
        parts = key.split("|")
        if len(parts) != 2 or parts[0] not in by_id or parts[1] not in by_id:
            raise InvariantViolation("presheaf-unknown-open", key)
        restrictions[(by_id[parts[0]], by_id[parts[1]])] = dict(table)
    return Presheaf(space, sections, restrictions)


def presheaf_map_from_json(data) -> PresheafMap:
    source = presheaf_from_json(_require(data, "source", dict, "presheaf-map"))
    target = presheaf_from_json(_require(data, "target", dict, "presheaf-map"))
    by_id = {open_id(o): o for o in source.space.opens}
    components = {}
    for oid, table in _require(data, "components", dict, "presheaf-map").items():
        if oid not in by_id:
            raise InvariantViolation("presheaf-unknown-open", oid)
        components[by_id[oid]] = dict(table)
    return PresheafMap(source, target, components)


def presheaf_map_to_json(psi: PresheafMap) -> dict:
    return {
        "source": presheaf_to_json(psi.source),
        "target": presheaf_to_json(psi.target),
        "components": {
            open_id(o): {str(s): str(v) for s, v in psi.components[o].items()}
            for o in psi.source.space.opens_sorted()
        },
    }


# -- cospans and points -----------------------------------------------------


def polynomial_map_from_json(data, side: str) -> PolynomialMap:
    nvars = _require(data, "vars", int, side)
    polys = _require(data, "polys", list, side)
    comps = [parse_polynomial(text, nvars) for text in polys]
    return PolynomialMap(nvars, len(comps), comps)


def cospan_from_json(data) -> CospanPresentation:
    left = polynomial_map_from_json(_require(data, "left", dict, "cospan"), "cospan.left")
    right = polynomial_map_from_json(_require(data, "right", dict, "cospan"), "cospan.right")
    return CospanPresentation(left, right)


def point_from_json(data, cospan: CospanPresentation) -> RationalPoint:
    x = [_parse_coord(v) for v in _require(data, "x", list, "point")]
    y = [_parse_coord(v) for v in _require(data, "y", list, "point")]
    return RationalPoint(cospan, x, y)


def _parse_coord(v) -> Fraction:
    if isinstance(v, bool):
        raise InvariantViolation("rational-parse", repr(v))
    if isinstance(v, (str, int)):
        return parse_rational(v)
    raise InvariantViolation("rational-parse", repr(v))


def fraction_str(x: Fraction) -> str:
    return str(x)
