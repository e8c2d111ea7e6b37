"""
Command-line interface.

    knotpack generate --family torus_knot --p 2 --q 3 --samples 2048 -o trefoil.json
    knotpack invariants trefoil.json --refine
    knotpack verify --which main_theorem trefoil.json
    knotpack sweep plan.json -o sweep.csv
    knotpack oracle trefoil.json --directions 2000

Exit status: 0 success / all certificates pass, 1 some certificate fails,
2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bounds import (
    all_passed,
    check_illumination,
    check_main_theorem,
    check_oscillation,
    check_packing,
    check_thickness_consequences,
)
from .curve import curve_to_json, load_curve
from .exceptions import CurveError, PreconditionError
from .generators import FAMILIES, CurveSpec, make_curve
from .invariants import compute_invariants, projection_crossing_oracle

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# flag name -> generator keyword, for the common scalar parameters
_SCALAR_FLAGS = {
    "p": int, "q": int, "n": int, "modes": int, "seed": int,
    "radius": float, "major_radius": float, "minor_radius": float,
    "theta_max": float, "exponent": float, "turn_weight": float, "corner_radius": float,
}

SELECTORS = ("packing", "oscillation", "illumination", "main_theorem", "thickness")

# certificate names each selector can emit, in column order
CERT_NAMES = {
    "packing": ("packing", "packing_closed", "packing_corollary"),
    "main_theorem": ("main_theorem", "main_theorem_assembled", "near_far_sum",
                     "near_bound", "far_bound", "ropelength_lower_bound"),
    "thickness": ("curvature_bound", "gap_bound", "schur_chord", "near_integrand"),
}

BASE_COLUMNS = ("curve_id", "parameter", "value", "L", "kappa", "R", "E_L",
                "acn", "writhe", "E_O", "near", "far")


class InputError(Exception):
    pass


def _point(text):
    try:
        xs = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}") from None
    if len(xs) != 3:
        raise argparse.ArgumentTypeError(f"expected 3 coordinates, got {len(xs)}")
    return xs


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- generate --------------------------------------------------------------

def cmd_generate(args):
    params = {}
    for name in _SCALAR_FLAGS:
        val = getattr(args, name)
        if val is not None:
            params[name] = val
    for item in args.param or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise InputError(f"--param expects key=value, got {item!r}")
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    spec = CurveSpec(args.family, params, args.samples)
    try:
        curve = make_curve(spec)
    except TypeError as exc:
        raise InputError(str(exc)) from exc
    _emit(json.dumps(curve_to_json(curve), sort_keys=True) + "\n", args.output)
    return EXIT_OK


# -- invariants --------------------------------------------------------------

def cmd_invariants(args):
    curve = load_curve(args.curve)
    rep = compute_invariants(curve, refine=args.refine, workers=args.workers)
    _emit(_dump(rep.to_dict()), args.output)
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def _run_selector(which, curve, args):
    if which == "packing":
        return check_packing(curve, rho=args.rho, center=args.center)
    if which == "oscillation":
        if args.a is None or args.b is None:
            raise InputError("oscillation needs --a and --b")
        return check_oscillation(curve, args.a, args.b, center=args.center or (0.0, 0.0, 0.0))
    if which == "illumination":
        if args.basepoint is None:
            raise InputError("illumination needs --basepoint x,y,z")
        return check_illumination(curve, args.basepoint)
    if which == "main_theorem":
        return check_main_theorem(curve, refine=args.refine, workers=args.workers)
    if which == "thickness":
        return check_thickness_consequences(curve)
    raise InputError(f"unknown selector {which!r}; expected one of {', '.join(SELECTORS)}")


def cmd_verify(args):
    curve = load_curve(args.curve)
    certs = []
    for which in args.which:
        certs.extend(_run_selector(which, curve, args))
    _emit(_dump([c.to_dict() for c in certs]), args.output)
    return EXIT_OK if all_passed(certs) else EXIT_FAIL


# -- sweep -------------------------------------------------------------------

def load_plan(path):
    """Read and validate a sweep plan.

    ``{"family": {...CurveSpec...}, "varying": {"name": ..., "values": [...]},
       "outputs": ["invariants", "packing", ...], "output": "out.csv",
       "workers": 2}``
    """
    try:
        plan = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(plan, dict):
        raise InputError("plan must be a JSON object")
    fam = plan.get("family")
    if not isinstance(fam, dict) or "family" not in fam:
        raise InputError("plan.family must be a CurveSpec object with a 'family' key")
    spec = CurveSpec(fam["family"], dict(fam.get("params", {})), int(fam.get("samples", 1024)))
    vary = plan.get("varying")
    if not isinstance(vary, dict) or "name" not in vary or "values" not in vary:
        raise InputError("plan.varying needs 'name' and 'values'")
    values = vary["values"]
    if not isinstance(values, list) or not values:
        raise InputError("plan.varying.values must be a non-empty list")
    for v in values:
        if isinstance(v, float) and not math.isfinite(v):
            raise InputError(f"varying value {v!r} is not finite")
    outputs = plan.get("outputs", ["invariants", "main_theorem"])
    bad = [o for o in outputs if o != "invariants" and o not in CERT_NAMES]
    if bad:
        raise InputError(f"unsupported sweep output(s): {', '.join(bad)}")
    workers = int(plan.get("workers", 1))
    if workers < 1:
        raise InputError("plan.workers must be >= 1")
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        values = sorted(values)
    return {"spec": spec, "name": str(vary["name"]), "values": values,
            "outputs": list(outputs), "output": plan.get("output"), "workers": workers}


def sweep_columns(outputs):
    cols = list(BASE_COLUMNS)
    for sel in outputs:
        for name in CERT_NAMES.get(sel, ()):
            cols += [f"{name}_lhs", f"{name}_rhs", f"{name}_margin", f"{name}_pass"]
    return cols + ["error"]


def _sweep_row(plan, k, value):
    spec = plan["spec"].with_param(plan["name"], value)
    row = {"curve_id": k, "parameter": plan["name"], "value": json.dumps(value)}
    try:
        curve = make_curve(spec)
        report = None
        if "invariants" in plan["outputs"] or "main_theorem" in plan["outputs"]:
            report = compute_invariants(curve, workers=1)
            row.update(L=report.length, kappa=report.total_curvature, R=report.thickness,
                       E_L=report.ropelength, acn=report.acn, writhe=report.writhe,
                       E_O=report.mobius_energy, near=report.near, far=report.far)
        for sel in plan["outputs"]:
            if sel == "packing":
                certs = check_packing(curve)
            elif sel == "main_theorem":
                certs = check_main_theorem(curve, report=report)
            elif sel == "thickness":
                certs = check_thickness_consequences(curve)
            else:
                continue
            for c in certs:
                row.update({f"{c.name}_lhs": c.lhs, f"{c.name}_rhs": c.rhs,
                            f"{c.name}_margin": c.margin, f"{c.name}_pass": c.passed})
    except (CurveError, PreconditionError, TypeError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(plan):
    """Evaluate every member; rows come back in plan order whatever the
    worker count."""
    jobs = list(enumerate(plan["values"]))
    if plan["workers"] == 1:
        return [_sweep_row(plan, k, v) for k, v in jobs]
    with ThreadPoolExecutor(max_workers=plan["workers"]) as pool:
        return list(pool.map(lambda kv: _sweep_row(plan, *kv), jobs))


def sweep_csv(plan, rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=sweep_columns(plan["outputs"]), lineterminator="\n",
                            restval="")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def cmd_sweep(args):
    plan = load_plan(args.plan)
    if args.workers is not None:
        plan["workers"] = args.workers
    rows = run_sweep(plan)
    _emit(sweep_csv(plan, rows), args.output or plan["output"])
    return EXIT_OK if not any(str(r.get(c, "")) == "False" for r in rows for c in r) else EXIT_FAIL


# -- oracle ------------------------------------------------------------------

def cmd_oracle(args):
    curve = load_curve(args.curve)
    res = projection_crossing_oracle(curve, directions=args.directions, seed=args.seed)
    values, freq = np.unique(res.counts, return_counts=True)
    out = {"mean": res.mean, "min_observed": res.min_observed, "directions": args.directions,
           "seed": args.seed, "retries": res.retries,
           "histogram": {str(int(v)): int(f) for v, f in zip(values, freq)}}
    _emit(_dump(out), args.output)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="knotpack", description="Knot invariants and certified inequalities.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated curve as JSON")
    g.add_argument("--family", required=True, choices=FAMILIES)
    g.add_argument("--samples", type=int, default=1024)
    for name, typ in _SCALAR_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    g.add_argument("--param", action="append", metavar="KEY=JSON",
                   help="any other generator parameter, value parsed as JSON")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("invariants", help="invariant report for a closed curve")
    i.add_argument("curve")
    i.add_argument("--refine", action="store_true", help="add Richardson error estimates")
    i.add_argument("--workers", type=int)
    i.add_argument("-o", "--output")
    i.set_defaults(func=cmd_invariants)

    v = sub.add_parser("verify", help="certify inequalities; exit 1 if any fails")
    v.add_argument("curve")
    v.add_argument("--which", action="append", choices=SELECTORS, required=True)
    v.add_argument("--basepoint", type=_point)
    v.add_argument("--center", type=_point)
    v.add_argument("--rho", type=float)
    v.add_argument("--a", type=float)
    v.add_argument("--b", type=float)
    v.add_argument("--refine", action="store_true")
    v.add_argument("--workers", type=int)
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="run a parameter sweep plan to CSV")
    s.add_argument("plan")
    s.add_argument("--workers", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="projection crossing-count oracle")
    o.add_argument("curve")
    o.add_argument("--directions", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, CurveError, PreconditionError, OSError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        pair = getattr(exc, "pair", None)
        if pair is not None:
            payload["segments"] = list(pair)
        sys.stderr.write(json.dumps(payload) + "\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
