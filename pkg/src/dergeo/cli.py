"""Batch front door: parse JSON inputs, dispatch to the library, emit
deterministic JSON reports.

Exit codes: 0 for verdict-true or a successful computation, 1 for a
false verdict (the report carries a replayable witness), 2 for input
errors (the report names the violated invariant).  Reports go to
stdout and are byte-identical across runs for identical inputs and
seed; wall time is written to stderr only.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import jsonio
from .atlas import (
    atlas_completion,
    compose_atlases,
    is_atlas_cover_condition,
    is_atlas_meet_condition,
    is_site,
    pullback_atlas,
    subordinate,
)
from .errors import BoundExceeded, InvariantViolation
from .lattice import SIEVE_ENUMERATION_BOUND
from .qsmooth import (
    hochschild_level,
    is_transverse,
    jacobian,
    koszul_betti,
    mapping_space_betti,
    nerve_cosimplicial_betti,
    pl_retraction_check,
    tangent_complex,
    virtual_dimension,
)
from .sheaf import descent_check, is_local_isomorphism, sheafify
from .simplicial import atlas_to_hypercover, hypercover_to_atlas, is_hypercover
from .sweeps import SUITES, run_sweep


def _load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(report: dict, witness_out: str | None = None) -> None:
    if witness_out and "witness" in report:
        with open(witness_out, "w", encoding="utf-8") as fh:
            json.dump(report["witness"], fh, sort_keys=True, indent=2)
            fh.write("\n")
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")


def _verdict_exit(verdict: bool) -> int:
    return 0 if verdict else 1


def cmd_check_atlas(args) -> int:
    diagram = jsonio.atlas_from_json(_load(args.atlas))
    cover = is_atlas_cover_condition(diagram)
    meet = None
    if len(diagram.index) <= SIEVE_ENUMERATION_BOUND:
        meet = is_atlas_meet_condition(diagram)
    report = {"command": "check-atlas", "verdict": cover, "cover_condition": cover, "meet_condition": meet}
    if not cover:
        report["witness"] = jsonio.atlas_to_json(diagram)
    _emit(report, args.witness_out)
    return _verdict_exit(cover)


def cmd_check_site(args) -> int:
    diagram = jsonio.atlas_from_json(_load(args.atlas))
    verdict = is_site(diagram)
    report = {"command": "check-site", "verdict": verdict}
    if not verdict:
        report["witness"] = jsonio.atlas_to_json(diagram)
    _emit(report, args.witness_out)
    return _verdict_exit(verdict)


def cmd_complete_cover(args) -> int:
    space = jsonio.space_from_json(_load(args.space))
    cover = _load(args.cover)
    if not isinstance(cover, list):
        raise InvariantViolation("json-bad-field", "cover file must be a list of opens")
    diagram = atlas_completion(space, cover)
    report = {
        "command": "complete-cover",
        "atlas": jsonio.atlas_to_json(diagram),
        "verdict": is_atlas_cover_condition(diagram),
    }
    _emit(report, args.witness_out)
    return 0


def cmd_pullback_atlas(args) -> int:
    f = jsonio.map_from_json(_load(args.map))
    diagram = jsonio.atlas_from_json(_load(args.atlas))
    pulled = pullback_atlas(f, diagram)
    report = {
        "command": "pullback-atlas",
        "atlas": jsonio.atlas_to_json(pulled.diagram),
        "input_was_atlas": pulled.input_was_atlas,
    }
    if not pulled.input_was_atlas:
        report["warning"] = "input diagram is not an atlas; pullback returned anyway"
    _emit(report, args.witness_out)
    return 0


def cmd_compose_atlas(args) -> int:
    diagram = jsonio.atlas_from_json(_load(args.atlas))
    eta_data = _load(args.eta)
    J = jsonio.poset_from_json(eta_data["index"] if "index" in eta_data else {})
    raw = eta_data.get("eta", {})
    by_str = {str(e): e for e in J.elements}
    idx_by_str = {str(e): e for e in diagram.index.elements}
    eta = {}
    for k, members in raw.items():
        if k not in by_str:
            raise InvariantViolation("composition-unknown-index", k)
        eta[by_str[k]] = frozenset(idx_by_str.get(str(m), m) for m in members)
    out = compose_atlases(diagram, J, eta)
    _emit({"command": "compose-atlas", "atlas": jsonio.atlas_to_json(out)}, args.witness_out)
    return 0


def cmd_subordinate(args) -> int:
    site_diagram = jsonio.atlas_from_json(_load(args.site))
    atlas_diagram = jsonio.atlas_from_json(_load(args.atlas))
    out = subordinate(site_diagram, atlas_diagram)
    _emit({"command": "subordinate", "atlas": jsonio.atlas_to_json(out)}, args.witness_out)
    return 0


def cmd_atlas_to_hypercover(args) -> int:
    diagram = jsonio.atlas_from_json(_load(args.atlas))
    H = atlas_to_hypercover(diagram, args.trunc)
    _emit(
        {"command": "atlas-to-hypercover", "hypercover": jsonio.hypercover_to_json(H)},
        args.witness_out,
    )
    return 0


def cmd_check_hypercover(args) -> int:
    H = jsonio.hypercover_from_json(_load(args.hypercover))
    level = args.level if args.level is not None else H.truncation
    verdict = is_hypercover(H, level)
    report = {"command": "check-hypercover", "verdict": verdict, "level": level}
    if not verdict:
        report["witness"] = jsonio.hypercover_to_json(H)
    _emit(report, args.witness_out)
    return _verdict_exit(verdict)


def cmd_hypercover_to_atlas(args) -> int:
    H = jsonio.hypercover_from_json(_load(args.hypercover))
    reading = hypercover_to_atlas(H)
    report = {
        "command": "hypercover-to-atlas",
        "verdict": reading.verdict,
        "flattened_verdict": reading.flattened_verdict,
        "atlas": jsonio.atlas_to_json(reading.diagram),
    }
    if not reading.verdict:
        report["witness"] = jsonio.hypercover_to_json(H)
    _emit(report, args.witness_out)
    return _verdict_exit(reading.verdict)


def cmd_sheaf_check(args) -> int:
    F = jsonio.presheaf_from_json(_load(args.presheaf))
    diagram = jsonio.atlas_from_json(_load(args.atlas))
    verdict = descent_check(F, diagram)
    report = {"command": "sheaf-check", "verdict": verdict}
    if not verdict:
        report["witness"] = {
            "presheaf": jsonio.presheaf_to_json(F),
            "atlas": jsonio.atlas_to_json(diagram),
        }
    _emit(report, args.witness_out)
    return _verdict_exit(verdict)


def cmd_sheafify(args) -> int:
    F = jsonio.presheaf_from_json(_load(args.presheaf))
    G, unit = sheafify(F)
    _emit(
        {
            "command": "sheafify",
            "sheaf": jsonio.presheaf_to_json(G),
            "unit_components": jsonio.presheaf_map_to_json(unit)["components"],
        },
        args.witness_out,
    )
    return 0


def cmd_local_iso(args) -> int:
    psi = jsonio.presheaf_map_from_json(_load(args.map))
    verdict = is_local_isomorphism(psi)
    report = {"command": "local-iso", "verdict": verdict}
    if not verdict:
        report["witness"] = jsonio.presheaf_map_to_json(psi)
    _emit(report, args.witness_out)
    return _verdict_exit(verdict)


def cmd_vdim(args) -> int:
    cospan = jsonio.cospan_from_json(_load(args.cospan))
    _emit({"command": "vdim", "vdim": virtual_dimension(cospan)}, args.witness_out)
    return 0


def cmd_tangent(args) -> int:
    cospan = jsonio.cospan_from_json(_load(args.cospan))
    point = jsonio.point_from_json(_load(args.point), cospan)
    complex_ = tangent_complex(cospan, point)
    h = complex_.homology_dimensions()
    report = {
        "command": "tangent",
        "degrees": [0, -1],
        "dims": [complex_.dims[1], complex_.dims[0]],
        "boundary": [[str(x) for x in row] for row in complex_.boundaries[0]],
        "h0": h[1],
        "h_minus_1": h[0],
        "euler_characteristic": h[1] - h[0],
    }
    _emit(report, args.witness_out)
    return 0


def cmd_transverse(args) -> int:
    cospan = jsonio.cospan_from_json(_load(args.cospan))
    point = jsonio.point_from_json(_load(args.point), cospan)
    verdict = is_transverse(cospan, point)
    report = {"command": "transverse", "transverse": verdict}
    if not verdict:
        report["witness"] = {
            "jacobian_left": [[str(x) for x in row] for row in jacobian(cospan.left, point.x)],
            "jacobian_right": [[str(x) for x in row] for row in jacobian(cospan.right, point.y)],
            "point": _load(args.point),
        }
    _emit(report, args.witness_out)
    return _verdict_exit(verdict)


def cmd_hochschild(args) -> int:
    cospan = jsonio.cospan_from_json(_load(args.cospan))
    lvl = hochschild_level(cospan, args.level)
    report = {
        "command": "hochschild",
        "level": lvl.level,
        "variables": lvl.nvars,
        "blocks": [{"name": name, "offset": off, "size": size} for name, off, size in lvl.blocks],
    }
    _emit(report, args.witness_out)
    return 0


def cmd_betti(args) -> int:
    cospan = jsonio.cospan_from_json(_load(args.cospan))
    point = jsonio.point_from_json(_load(args.point), cospan)
    betti = mapping_space_betti(cospan, point, args.jet, args.levels, args.target)
    _emit(
        {
            "command": "betti",
            "betti": betti,
            "jet_order": args.jet,
            "levels": args.levels,
            "target_dim": args.target,
            "note": "top entry lacks the incoming differential (informational)",
        },
        args.witness_out,
    )
    return 0


def cmd_nerve_betti(args) -> int:
    cospan = jsonio.cospan_from_json(_load(args.cospan))
    point = jsonio.point_from_json(_load(args.point), cospan)
    betti = nerve_cosimplicial_betti(cospan, point, args.jet, args.levels, args.target)
    _emit(
        {
            "command": "nerve-betti",
            "betti": betti,
            "jet_order": args.jet,
            "levels": args.levels,
            "target_dim": args.target,
        },
        args.witness_out,
    )
    return 0


def cmd_koszul(args) -> int:
    _emit({"command": "koszul", "betti": koszul_betti(args.codim)}, args.witness_out)
    return 0


def cmd_pl_check(args) -> int:
    rep = pl_retraction_check(Fraction(args.bound), args.steps)
    report = {
        "command": "pl-check",
        "verdict": rep.verdict,
        "grid_points": rep.grid_points,
        "retraction_identity_ok": rep.retraction_identity_ok,
        "axes_collapse_ok": rep.axes_collapse_ok,
        "continuity_ok": rep.continuity_ok,
        "derivative_witness": rep.derivative_witness,
    }
    if not rep.verdict:
        report["witness"] = rep.failure_witness
    _emit(report, args.witness_out)
    return _verdict_exit(rep.verdict)


def _sweep_worker(payload):
    suite, kwargs = payload
    return run_sweep(suite, **kwargs).to_json()


def cmd_sweep(args) -> int:
    kwargs = {
        "points": args.points,
        "poset": args.poset,
        "corpus": args.corpus,
        "seed": args.seed,
    }
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        from .sweeps import SweepResult

        payloads = [
            (args.suite, {**kwargs, "shard": k, "nshards": args.jobs})
            for k in range(args.jobs)
        ]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            partials = list(pool.map(_sweep_worker, payloads))
        result = SweepResult(args.suite)
        for part in partials:  # deterministic order, summation commutes
            result.instances += part["instances"]
            result.agreements += part["agree"]
            if result.counterexample is None and "counterexample" in part:
                result.counterexample = part["counterexample"]
            result.details.update(part.get("details", {}))
    else:
        result = run_sweep(args.suite, **kwargs)
    report = {"command": "sweep", **result.to_json()}
    if result.counterexample is not None:
        report["witness"] = result.counterexample
    _emit(report, args.witness_out)
    return _verdict_exit(result.ok)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dergeo",
        description="Atlas, hypercover, descent and quasi-smooth intersection calculators on finite spaces",
    )
    parser.add_argument("--witness-out", default=None, help="write the failure witness to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **files):
        p = sub.add_parser(name)
        for arg, help_text in files.items():
            p.add_argument(arg, help=help_text)
        p.set_defaults(fn=fn)
        return p

    add("check-atlas", cmd_check_atlas, atlas="atlas.json path")
    add("check-site", cmd_check_site, atlas="atlas.json path")
    add("complete-cover", cmd_complete_cover, space="space.json path", cover="cover.json path (list of opens)")
    add("pullback-atlas", cmd_pullback_atlas, map="map.json path", atlas="atlas.json path")
    add("compose-atlas", cmd_compose_atlas, atlas="atlas.json path", eta="eta.json path ({index, eta})")
    add("subordinate", cmd_subordinate, site="site atlas.json path", atlas="atlas.json path")
    p = add("atlas-to-hypercover", cmd_atlas_to_hypercover, atlas="atlas.json path")
    p.add_argument("--trunc", type=int, default=3)
    p = add("check-hypercover", cmd_check_hypercover, hypercover="hypercover.json path")
    p.add_argument("--level", type=int, default=None)
    add("hypercover-to-atlas", cmd_hypercover_to_atlas, hypercover="hypercover.json path")
    add("sheaf-check", cmd_sheaf_check, presheaf="presheaf.json path", atlas="atlas.json path")
    add("sheafify", cmd_sheafify, presheaf="presheaf.json path")
    add("local-iso", cmd_local_iso, map="presheaf-map.json path")
    add("vdim", cmd_vdim, cospan="cospan.json path")
    p = add("tangent", cmd_tangent, cospan="cospan.json path")
    p.add_argument("--point", required=True)
    p = add("transverse", cmd_transverse, cospan="cospan.json path")
    p.add_argument("--point", required=True)
    p = add("hochschild", cmd_hochschild, cospan="cospan.json path")
    p.add_argument("--level", type=int, default=0)
    for name, fn in (("betti", cmd_betti), ("nerve-betti", cmd_nerve_betti)):
        p = add(name, fn, cospan="cospan.json path")
        p.add_argument("--point", required=True)
        p.add_argument("--jet", type=int, default=2)
        p.add_argument("--levels", type=int, default=3)
        p.add_argument("--target", type=int, default=1)
    p = add("koszul", cmd_koszul)
    p.add_argument("--codim", type=int, required=True)
    p = add("pl-check", cmd_pl_check)
    p.add_argument("--bound", default="5")
    p.add_argument("--steps", type=int, default=101)
    p = sub.add_parser("sweep")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--points", type=int, default=3)
    p.add_argument("--poset", type=int, default=3)
    p.add_argument("--corpus", type=int, default=50)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        code = args.fn(args)
    except (InvariantViolation,) as err:
        _emit(
            {
                "command": args.command,
                "error": str(err),
                "invariant": getattr(err, "invariant", None),
            }
        )
        code = 2
    except (BoundExceeded, FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as err:
        _emit({"command": args.command, "error": f"{type(err).__name__}: {err}"})
        code = 2
    print(f"elapsed_ms={int((time.perf_counter() - started) * 1000)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
