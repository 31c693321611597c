"""Scenario-driven command line front end.

Usage:
    greencurves run scenario.json [--out DIR] [--svg] [--verbose]
    greencurves gallery
    greencurves render report.json --kind K [--out FILE]

A scenario is a JSON document (schema 1) naming a curve, a function, grid and
quadrature settings, and a list of checks to run.  Reports are canonical
JSON: rerunning the same scenario with the same seed produces byte-identical
bytes.  Timings go to stderr with --verbose, never into the report.

Exit codes: 0 success, 1 hard invariant failure, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .curves import curve_families, gallery_curves, jordan_decompose, length, make_curve
from .errors import (GreenCurvesError, KindMismatch, ParseError, UnknownFamily)
from .functions import function_families, make_function, truncated_cauchy, with_cutoff
from .integration import (GreenConfig, Square, contour_integral, green_on_square,
                          mollifier_identity_check, verify_green)
from .mainlemma import Disc, bound_check, exterior_integral_identity, geometry_dump, with_jitter
from .svg import render_svg
from .vitushkin import delta_sweep
from .winding import GridSpec, index_field, winding_numbers

_CHECK_NAMES = ("green", "decompose", "vitushkin", "mainlemma", "square", "mollifier")


def _load_scenario(path: str) -> dict:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read scenario: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != 1:
        raise ParseError("scenario must be an object with schema: 1")
    for key in ("curve", "checks"):
        if key not in doc:
            raise ParseError(f"scenario is missing required key {key!r}")
    for name in doc["checks"]:
        if name not in _CHECK_NAMES:
            raise ParseError(f"unknown check {name!r}; valid: {_CHECK_NAMES}")
    doc["_hash"] = hashlib.sha256(raw).hexdigest()
    return doc


def _build_curve(doc: dict):
    spec = doc["curve"]
    params = dict(spec.get("params", {}))
    for key in ("center",):
        if key in params and isinstance(params[key], list):
            params[key] = complex(*params[key])
    return make_curve(spec["family"], **params)


def _build_function(doc: dict):
    spec = doc.get("function", {"family": "monomial", "params": {"a": 0, "b": 1}})
    params = dict(spec.get("params", {}))
    for key in ("center", "pole"):
        if key in params and isinstance(params[key], list):
            params[key] = complex(*params[key])
    if "terms" in params:
        params["terms"] = tuple(tuple(t) for t in params["terms"])
    f = make_function(spec["family"], **params)
    cut = spec.get("cutoff")
    if cut:
        f = with_cutoff(f, cut["r_inner"], cut["r_outer"],
                        center=complex(*cut.get("center", [0, 0])))
    return f


def _green_cfg(doc: dict) -> GreenConfig:
    g = doc.get("grid", {})
    q = doc.get("quadrature", {})
    return GreenConfig(
        resolution=int(g.get("resolution", 256)),
        dilate=float(g.get("dilate", 1.5)),
        band_diagonals=float(g.get("band_diagonals", 2.0)),
        refine=int(q.get("refine", 3)),
        contour_order=int(q.get("contour_order", 8)),
    )


def _angle_winding(curve, z):
    v = curve.vertices
    w = np.roll(v, -1)
    return int(round(float(np.angle((w - z) / (v - z)).sum()) / (2 * np.pi)))


def _check_green(doc, curve, f, seed):
    cfg = _green_cfg(doc)
    rep = verify_green(curve, f, cfg)
    # exact-integer invariant at seeded probe points: the ray-crossing index
    # must agree with the rounded argument sum
    rng = np.random.default_rng(seed)
    lo, hi = curve.bbox
    span = (hi - lo) or 1.0
    from .winding import distance_to_curve
    pts = []
    while len(pts) < 64:
        z = lo + complex(rng.random() * span.real, rng.random() * span.imag)
        if distance_to_curve(curve, np.array([z]))[0] > 1e-4 * curve.diameter:
            pts.append(z)
    ray = winding_numbers(curve, np.array(pts))
    ang = np.array([_angle_winding(curve, z) for z in pts])
    hard_fail = bool(np.any(ray != ang))
    return {"report": rep.to_json_dict(), "hard_fail": hard_fail}


def _check_decompose(doc, curve, f, seed):
    dec = jordan_decompose(curve)
    from .curves import is_jordan
    simple = all(is_jordan(lp) for lp in dec.loops)
    total = sum(length(lp) for lp in dec.loops)
    tau_len = 1e-9 * length(curve)
    g = make_function("monomial", a=0, b=1)
    direct = contour_integral(curve, g)
    split = sum((contour_integral(lp, g) for lp in dec.loops), 0j)
    resid = abs(direct - split)
    ok = simple and total <= length(curve) + tau_len
    return {
        "report": {
            "n_loops": len(dec.loops),
            "length_gap": dec.gap,
            "loops_simple": simple,
            "measure_residual_zbar": resid,
        },
        "hard_fail": not ok,
    }


def _check_vitushkin(doc, curve, f, seed):
    deltas = doc.get("deltas", [0.4, 0.2, 0.1, 0.05])
    rows = delta_sweep(f, curve, deltas)
    decreasing = all(a["s_ii_abs"] >= b["s_ii_abs"] for a, b in zip(rows, rows[1:]))
    return {"report": {"sweep": rows, "s_ii_decreasing": decreasing}, "hard_fail": False,
            "sweep_table": rows}


def _check_mainlemma(doc, curve, f, seed):
    from .errors import BoundViolated, NestingViolation
    reports = []
    hard = False
    dumps = []
    for spec in doc.get("discs", [{"center": [1.0, 0.0], "radius": 0.5}]):
        disc = Disc(center=complex(*spec["center"]), radius=float(spec["radius"]))
        disc = with_jitter(curve, disc, seed=seed)
        h = truncated_cauchy(disc.center + 0.1 * disc.radius, 0.3 * disc.radius)
        try:
            rep = exterior_integral_identity(curve, disc, h)
            bound_check(curve, disc, h)
        except (BoundViolated, NestingViolation) as exc:
            # alternation / sign / bound failures are hard invariants, not input errors
            hard = True
            reports.append({"error": str(exc)})
            continue
        reports.append(rep.to_json_dict())
        dumps.append(geometry_dump(curve, disc))
    return {"report": {"discs": reports}, "hard_fail": hard, "dumps": dumps}


def _check_square(doc, curve, f, seed):
    spec = doc.get("square", {"center": [0.0, 0.0], "half": 0.25, "depth": 5})
    sq = Square(center=complex(*spec["center"]), half=float(spec["half"]))
    rep = green_on_square(sq, f, curve, depth=int(spec.get("depth", 5)))
    rows = rep.extras["generations"]
    ok = all(row["remainder"] <= row["remainder_bound"] * (1 + 1e-9) + 1e-12 for row in rows[1:])
    return {"report": rep.to_json_dict(), "hard_fail": not ok}


def _check_mollifier(doc, curve, f, seed):
    spec = doc.get("mollifier", {"z": [0.3, 0.1], "eps": 0.05})
    rep = mollifier_identity_check(f, complex(*spec["z"]), float(spec["eps"]))
    return {"report": rep.to_json_dict(), "hard_fail": False}


_CHECKS = {
    "green": _check_green,
    "decompose": _check_decompose,
    "vitushkin": _check_vitushkin,
    "mainlemma": _check_mainlemma,
    "square": _check_square,
    "mollifier": _check_mollifier,
}


def run_scenario(path: str, out_dir: str = None, svg: bool = False, verbose: bool = False):
    """Execute a scenario; returns (report dict, exit code)."""
    doc = _load_scenario(path)
    seed = int(doc.get("seed", 0))
    curve = _build_curve(doc)
    f = _build_function(doc)
    checks = list(doc["checks"])

    n_threads = int(os.environ.get("GC_THREADS", "0") or "0")
    if n_threads <= 0:
        n_threads = min(4, os.cpu_count() or 1)

    results = {}
    timings = {}

    def run_one(name):
        t0 = time.perf_counter()
        res = _CHECKS[name](doc, curve, f, seed)
        timings[name] = time.perf_counter() - t0
        return name, res

    if n_threads > 1 and len(checks) > 1:
        with ThreadPoolExecutor(max_workers=min(n_threads, len(checks))) as ex:
            for name, res in ex.map(run_one, checks):
                results[name] = res
    else:
        for name in checks:
            results[name] = run_one(name)[1]

    hard_fail = any(results[name].get("hard_fail") for name in checks)
    report = {
        "tool": "greencurves",
        "version": __version__,
        "schema": 1,
        "input_hash": doc["_hash"],
        "seed": seed,
        "checks": {name: results[name]["report"] for name in checks},
        "status": "fail" if hard_fail else "ok",
    }

    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_bytes(canonical_json(report))
        if "mainlemma" in checks:
            for k, dump in enumerate(results["mainlemma"].get("dumps", [])):
                (out / f"mainlemma_{k}.json").write_bytes(canonical_json(dump))
        if svg:
            (out / "curve.svg").write_text(render_svg(
                [[z.real, z.imag] for z in curve.vertices], "curve"))
            if "green" in checks:
                cfg = _green_cfg(doc)
                grid = GridSpec.cover(curve, min(cfg.resolution, 128), cfg.dilate)
                fld = index_field(curve, grid, 2 * grid.cell_diag)
                (out / "index.svg").write_text(render_svg(fld.to_json_dict(), "index-heatmap"))
            if "vitushkin" in checks and "sweep_table" in results["vitushkin"]:
                (out / "sweep.svg").write_text(render_svg(
                    {"table": results["vitushkin"]["sweep_table"]}, "sweep-plot"))
            if "mainlemma" in checks:
                for k, dump in enumerate(results["mainlemma"].get("dumps", [])):
                    (out / f"mainlemma_{k}.svg").write_text(render_svg(dump, "mainlemma-diagram"))
    if verbose:
        for name in checks:
            print(f"[timing] {name}: {timings[name]:.3f}s", file=sys.stderr)
    return report, (1 if hard_fail else 0)


def canonical_json(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n").encode()


def cmd_gallery() -> str:
    lines = ["curve families:"]
    for name, doc in sorted(curve_families().items()):
        lines.append(f"  {name}: {doc}")
    lines.append("function families:")
    for name, doc in sorted(function_families().items()):
        lines.append(f"  {name}: {doc}")
    lines.append("standard curves:")
    for name, c in gallery_curves():
        lines.append(f"  {name}: n={c.n}, length={length(c):.6g}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="greencurves", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None, help="directory for report.json and plots")
    p_run.add_argument("--svg", action="store_true", help="also write SVG plots")
    p_run.add_argument("--verbose", action="store_true")

    sub.add_parser("gallery", help="list curve and function families")

    p_render = sub.add_parser("render", help="render a report or geometry dump to SVG")
    p_render.add_argument("input")
    p_render.add_argument("--kind", required=True,
                          choices=["curve", "index-heatmap", "mainlemma-diagram", "sweep-plot"])
    p_render.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    try:
        if args.command == "gallery":
            sys.stdout.write(cmd_gallery())
            return 0
        if args.command == "run":
            report, code = run_scenario(args.scenario, out_dir=args.out, svg=args.svg,
                                        verbose=args.verbose)
            if not args.out:
                sys.stdout.write(canonical_json(report).decode())
            return code
        if args.command == "render":
            payload = json.loads(Path(args.input).read_text())
            if isinstance(payload, dict) and "checks" in payload and args.kind == "sweep-plot":
                try:
                    payload = {"table": payload["checks"]["vitushkin"]["sweep"]}
                except KeyError:
                    raise KindMismatch("report has no vitushkin sweep table") from None
            doc = render_svg(payload, args.kind)
            if args.out:
                Path(args.out).write_text(doc)
            else:
                sys.stdout.write(doc)
            return 0
    except (ParseError, UnknownFamily, KindMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GreenCurvesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry():
    raise SystemExit(main())
