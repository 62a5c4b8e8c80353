"""Command-line front end.

Exit status: 0 success, 1 a gated residual exceeded its tolerance, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .curvegeo import CurveSamples, FrenetData, curve_from_expressions, curve_from_points, detect_special
from .curvegeo import frenet_apparatus, reparametrize_arclength
from .fields import FIELD_NAMES, FieldSpec, builtin_field, classify_field, default_tol, field_from_samples
from .manifold import METRIC_NAMES, ChartMetric, builtin_metric
from .slant import angle_function, classify_euclidean_slant, slant_report
from .synthesis import CURVE_NAMES, SynthesisConfig, builtin_curve, frenet_integrate
from .synthesis import synthesize_concircular, synthesize_slant_from_phi
from .torqued import torqued_report
from .verify import checks_to_dicts, example_suite, random_points, suite_passed

log = logging.getLogger("slanthelix")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
FRENET_TOL = {"analytic": 1e-5, "sampled": 1e-2}
SYSTEM_TOL = {"analytic": 1e-4, "sampled": 1e-2}
ORTHONORMAL_TOL = 1e-8


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialization


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def _write(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def read_curve_csv(path: str, metric_name: Optional[str], metric_params) -> tuple[np.ndarray, np.ndarray, ChartMetric]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"curve file not found: {path}")
    with p.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    m = len(header) - 1
    if m < 2 or header != ["t"] + [f"x{i}" for i in range(1, m + 1)]:
        raise InputError(f"{path}: header must be t,x1,...,xm (got {','.join(header)})")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != m + 1:
        raise InputError(f"{path}: ragged rows")
    bad = np.flatnonzero(np.diff(data[:, 0]) <= 0)
    if bad.size:
        raise InputError(f"{path}: t is not strictly increasing at row {int(bad[0]) + 2}")
    metric = builtin_metric(metric_name or "euclidean", m, metric_params)
    return data[:, 0], data[:, 1:], metric


def read_field_csv(path: str, metric: ChartMetric) -> FieldSpec:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"field file not found: {path}")
    data = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    header = p.read_text().splitlines()[0].strip().split(",")
    m = metric.dim
    expected = [f"x{i}" for i in range(1, m + 1)] + [f"v{i}" for i in range(1, m + 1)]
    if header != expected:
        raise InputError(f"{path}: header must be {','.join(expected)}")
    return field_from_samples(metric, data[:, :m], data[:, m:], name=p.stem)


def plot_csv(frenet: FrenetData, angle: Optional[np.ndarray] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    m = frenet.dim
    k = frenet.order - 1
    cols = ["s"] + [f"x{i}" for i in range(1, m + 1)] + [f"kappa{i}" for i in range(1, k + 1)]
    if angle is not None:
        cols.append("angle")
    w.writerow(cols)
    for i in range(len(frenet.samples)):
        row = [frenet.samples[i], *frenet.points[i], *frenet.curvatures[i, :k]]
        if angle is not None:
            row.append(angle[i])
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def curve_csv(curve: CurveSamples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{i}" for i in range(1, curve.dim + 1)])
    for t, p in zip(curve.grid, curve.points):
        w.writerow([repr(float(t))] + [repr(float(v)) for v in p])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# pipeline pieces


def load_curve(args) -> CurveSamples:
    src = args.curve
    params = args.curve_params or ()
    if src in CURVE_NAMES:
        curve = builtin_curve(src, params, tuple(args.s_range) if args.s_range else None, n=args.samples)
        if args.metric and args.metric != curve.metric.name:
            raise InputError(f"built-in curve {src!r} lives in {curve.metric.name}, not {args.metric}")
        return curve
    if src.startswith("expr:"):
        exprs = [e.strip() for e in src[5:].split(",")]
        if not args.s_range:
            raise InputError("expression curves need --s-range for the parameter interval")
        metric = builtin_metric(args.metric or "euclidean", len(exprs), args.metric_params or ())
        curve = curve_from_expressions(exprs, tuple(args.s_range), metric, n=args.samples, name="expression")
        return reparametrize_arclength(curve, args.samples)
    t, pts, metric = read_curve_csv(src, args.metric, args.metric_params or ())
    return reparametrize_arclength(curve_from_points(t, pts, metric, name=Path(src).stem), args.samples)


def load_field(src: Optional[str], metric: ChartMetric, params) -> Optional[FieldSpec]:
    if src is None:
        return None
    if src in FIELD_NAMES:
        return builtin_field(src, metric, params or ())
    return read_field_csv(src, metric)


def _kind(curve: CurveSamples) -> str:
    return "analytic" if curve.analytic is not None else "sampled"


def _field_tol(args, fld: FieldSpec) -> float:
    return args.tol if getattr(args, "tol_given", True) else default_tol(fld)


def _residual(value, tol) -> dict:
    value = float(value)
    return {"value": value, "tol": tol, "passed": bool(math.isfinite(value) and value < tol)}


def frenet_block(curve: CurveSamples, frenet: FrenetData, tol: float) -> tuple[dict, dict]:
    special = detect_special(frenet, tol)
    block = {
        "order": frenet.order,
        "n_samples": len(frenet.samples),
        "s_range": [float(frenet.samples[0]), float(frenet.samples[-1])],
        "oriented": frenet.oriented,
        "curvature_ranges": {f"kappa{i + 1}": [float(frenet.curvatures[:, i].min()), float(frenet.curvatures[:, i].max())]
                             for i in range(frenet.order - 1)},
        "special": {k: v for k, v in vars(special).items()},
        "source": _kind(curve),
    }
    ftol = FRENET_TOL[_kind(curve)]
    res = {}
    for key, val in frenet.residuals.items():
        res[f"frenet.{key}"] = _residual(val, ORTHONORMAL_TOL if key == "orthonormality" else ftol)
    return block, res


def _classification_block(rep) -> dict:
    return {"label": rep.label, "proper": rep.proper_flag, "passing": rep.passing, "stats": rep.stats, "tol": rep.tol,
            "n_points": len(rep.rho)}


def _system_residuals(prefix: str, sysres, tol: float) -> dict:
    if sysres is None:
        return {}
    return {f"{prefix}.{sysres.name}.{line}": _residual(v, tol) for line, v in sysres.lines.items()}


def analyze_pipeline(args, mode: str) -> tuple[dict, int, Optional[str]]:
    curve = load_curve(args)
    metric = curve.metric
    field_src = args.field
    if field_src is None and mode == "slant":
        field_src = "hyperbolic_em" if metric.name == "hyperbolic_upper_half" else "radial_unit"
    if field_src is None and mode == "torqued":
        raise InputError("torqued-check needs --field")
    fld = load_field(field_src, metric, args.field_params)
    frenet = frenet_apparatus(curve)
    tol = args.tol
    sys_tol = max(tol, SYSTEM_TOL[_kind(curve)])
    fblock, residuals = frenet_block(curve, frenet, tol)
    report = {
        "input": {"command": args.command, "curve": args.curve, "curve_params": args.curve_params,
                  "metric": metric.name, "metric_params": list(metric.params), "dim": metric.dim,
                  "field": field_src, "field_params": args.field_params, "samples": args.samples, "tol": tol,
                  "s_range": args.s_range},
        "frenet": fblock, "field_classification": None, "slant": None, "torqued": None,
        "classification_branch": None, "residuals": residuals, "diagnostics": [],
    }
    diagnostics = report["diagnostics"]
    angle = None
    if fld is not None:
        cls = classify_field(fld, frenet.points, _field_tol(args, fld))
        report["field_classification"] = _classification_block(cls)
        angle = angle_function(curve, frenet, fld)
        want_slant = mode == "slant" or (mode == "analyze" and cls.label == "anti_torqued")
        want_torqued = mode == "torqued" or (mode == "analyze" and cls.label in ("torqued", "concircular", "recurrent"))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if want_slant:
                rep = slant_report(curve, frenet, fld, tol)
                report["slant"] = rep.to_dict()
                gate = mode == "slant" or rep.is_slant_helix
                if mode == "slant":
                    residuals["slant.constancy"] = _residual(rep.constancy_residual, tol)
                if gate:
                    residuals.update(_system_residuals("slant", rep.system_residuals, sys_tol))
                if (metric.name in ("euclidean", "punctured_euclidean") and metric.dim == 3 and
                        fld.name == "radial_unit" and frenet.order >= 2 and rep.is_slant_helix):
                    e = classify_euclidean_slant(curve, frenet, max(tol, 1e-6))
                    report["classification_branch"] = e.to_dict()
            if want_torqued:
                rep_t = torqued_report(curve, frenet, fld, tol)
                report["torqued"] = rep_t.to_dict()
                if mode == "torqued":
                    residuals["torqued.constancy"] = _residual(rep_t.constancy_residual, tol)
                if mode == "torqued" or rep_t.is_torqued_curve:
                    residuals.update(_system_residuals("torqued", rep_t.system_residuals, sys_tol))
                    residuals["torqued.V_dot_W"] = _residual(rep_t.orthogonality_residual, max(tol, 1e-6))
        diagnostics.extend(str(w.message) for w in caught)
    status = EXIT_OK if all(r["passed"] for r in residuals.values()) else EXIT_FAIL
    csv_text = plot_csv(frenet, angle)
    return report, status, csv_text


def classify_field_pipeline(args) -> tuple[dict, int, Optional[str]]:
    if args.field is None:
        raise InputError("classify-field needs --field")
    metric = builtin_metric(args.metric or _default_metric(args.field), args.dim, args.metric_params or ())
    fld = load_field(args.field, metric, args.field_params)
    if args.points:
        pts = np.loadtxt(args.points, delimiter=",", skiprows=1, ndmin=2)
    else:
        pts = random_points(metric.name, args.samples, np.random.default_rng(args.seed), metric.dim)
    ftol = _field_tol(args, fld)
    rep = classify_field(fld, pts, ftol)
    block = _classification_block(rep)
    residuals = {"field.torse_forming_fit": _residual(rep.stats["max_residual"], ftol)}
    if rep.label == "anti_torqued":
        from .verify import anti_torqued_unit_geodesic

        unit, acc = anti_torqued_unit_geodesic(fld, pts)
        residuals["field.unit_length"] = _residual(unit, ftol)
        residuals["field.geodesic"] = _residual(acc, ftol)
    report = {
        "input": {"command": args.command, "field": args.field, "field_params": args.field_params,
                  "metric": metric.name, "metric_params": list(metric.params), "dim": metric.dim,
                  "samples": len(pts), "seed": args.seed, "tol": ftol},
        "frenet": None, "field_classification": block, "slant": None, "torqued": None,
        "classification_branch": None, "residuals": residuals, "diagnostics": [],
    }
    status = EXIT_OK if all(r["passed"] for r in residuals.values()) else EXIT_FAIL
    return report, status, None


def _default_metric(field_name: str) -> str:
    return {"radial_unit": "punctured_euclidean", "hyperbolic_em": "hyperbolic_upper_half",
            "twisted_torqued": "warped_interval_product"}.get(field_name, "euclidean")


def synthesize_pipeline(args) -> tuple[dict, int, Optional[str]]:
    s_range = tuple(args.s_range) if args.s_range else (1.0, 3.0)
    if args.kind == "frenet":
        if args.kappa is None or args.tau is None:
            raise InputError("--kind frenet needs --kappa and --tau")
        curve = frenet_integrate(args.kappa, args.tau, s_range, n=args.samples)
        post = None
    elif args.kind == "slant":
        if args.phi is None or args.theta is None:
            raise InputError("--kind slant needs --phi and --theta")
        curve = synthesize_slant_from_phi(SynthesisConfig(args.theta, args.phi, s_range, args.tau0, args.samples))
        post = curve.meta["post_verification"]
    else:
        if None in (args.f3, args.theta, args.rho, args.f1_0):
            raise InputError("--kind concircular needs --f3, --theta, --rho and --f1-0")
        curve = synthesize_concircular(args.f3, args.theta, args.rho, args.f1_0, s_range, n=args.samples)
        post = curve.meta["post_verification"]
    frenet = frenet_apparatus(curve)
    fblock, residuals = frenet_block(curve, frenet, args.tol)
    if post is not None:
        key = "max_angle_deviation" if "max_angle_deviation" in post else "max_theta_deviation"
        residuals[f"synthesis.{key}"] = _residual(post[key], post["tol"])
    meta = {k: v for k, v in curve.meta.items() if k not in ("state",) and not callable(v)}
    meta = {k: (v if np.ndim(v) == 0 or k == "field_params" else None) for k, v in meta.items()}
    report = {
        "input": {"command": args.command, "kind": args.kind, "kappa": args.kappa, "tau": args.tau, "phi": args.phi,
                  "theta": args.theta, "tau0": args.tau0, "f3": args.f3, "rho": args.rho, "f1_0": args.f1_0,
                  "s_range": list(s_range), "samples": args.samples, "tol": args.tol},
        "frenet": fblock, "field_classification": None, "slant": None, "torqued": None,
        "classification_branch": None, "residuals": residuals,
        "diagnostics": [f"{k}={v}" for k, v in sorted(meta.items()) if v is not None and k != "post_verification"],
    }
    status = EXIT_OK if all(r["passed"] for r in residuals.values()) else EXIT_FAIL
    return report, status, curve_csv(curve)


def verify_pipeline(args) -> tuple[dict, int, Optional[str]]:
    checks = example_suite(args.tol, args.seed)
    residuals = {c.name: {"value": c.value, "target": c.target, "tol": c.tol, "passed": c.passed}
                 for c in checks if c.kind == "check"}
    notes = [f"{c.name}: {c.detail} (listed {c.value:.12g})" for c in checks if c.kind == "note" and not c.passed]
    report = {
        "input": {"command": args.command, "tol": args.tol, "seed": args.seed},
        "frenet": None, "field_classification": None, "slant": None, "torqued": None,
        "classification_branch": None, "residuals": residuals, "diagnostics": notes,
        "checks": checks_to_dicts(checks),
    }
    return report, EXIT_OK if suite_passed(checks) else EXIT_FAIL, None


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=None,
                   help="verification tolerance (default 1e-6; field fits with finite-difference Jacobians 1e-3)")
    p.add_argument("--samples", type=int, default=201, help="number of samples (default 201)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0, help="seed for random sample points")


def _geometry(p: argparse.ArgumentParser, curve: bool = True):
    if curve:
        p.add_argument("--curve", required=True,
                       help=f"built-in name ({', '.join(CURVE_NAMES)}), CSV path, or 'expr:x1,x2,...' in t")
        p.add_argument("--curve-params", type=float, nargs="*", default=None)
        p.add_argument("--s-range", type=float, nargs=2, default=None, metavar=("LO", "HI"))
        p.add_argument("--plot", default=None, help="also write plot CSV (s, coordinates, curvatures, angle)")
    p.add_argument("--metric", choices=METRIC_NAMES, default=None)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--metric-params", type=float, nargs="*", default=None)
    p.add_argument("--field", default=None, help=f"built-in name ({', '.join(FIELD_NAMES)}) or CSV path")
    p.add_argument("--field-params", type=float, nargs="*", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slanthelix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("analyze", "Frenet data plus whatever field analysis applies"),
                        ("slant-check", "verify the slant-helix condition"),
                        ("torqued-check", "verify the torqued-curve condition")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        _geometry(p)
    p = sub.add_parser("classify-field", help="classify a vector field at sample points")
    _common(p)
    _geometry(p, curve=False)
    p.add_argument("--points", default=None, help="CSV of sample points (header x1..xm)")
    p = sub.add_parser("synthesize", help="construct a curve by integration")
    _common(p)
    p.add_argument("--kind", choices=("frenet", "slant", "concircular"), required=True)
    p.add_argument("--kappa")
    p.add_argument("--tau")
    p.add_argument("--phi")
    p.add_argument("--theta", type=float)
    p.add_argument("--tau0", type=float)
    p.add_argument("--f3")
    p.add_argument("--rho", type=float)
    p.add_argument("--f1-0", dest="f1_0", type=float)
    p.add_argument("--s-range", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    p = sub.add_parser("verify-examples", help="run the reference example suite")
    _common(p)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
    args.tol_given = args.tol is not None
    if args.tol is None:
        args.tol = 1e-6
    if args.tol <= 0 or args.samples < 5:
        print("error: --tol must be positive and --samples at least 5", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "analyze":
            report, status, csv_text = analyze_pipeline(args, "analyze")
        elif args.command == "slant-check":
            report, status, csv_text = analyze_pipeline(args, "slant")
        elif args.command == "torqued-check":
            report, status, csv_text = analyze_pipeline(args, "torqued")
        elif args.command == "classify-field":
            report, status, csv_text = classify_field_pipeline(args)
        elif args.command == "synthesize":
            report, status, csv_text = synthesize_pipeline(args)
        else:
            report, status, csv_text = verify_pipeline(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report["metadata"] = {"timestamp": datetime.now(timezone.utc).isoformat(), "version": __version__}
    if args.format == "csv":
        if csv_text is None:
            print(f"error: {args.command} has no CSV output", file=sys.stderr)
            return EXIT_INPUT
        _write(csv_text, args.out)
    else:
        _write(dump_json(report), args.out)
    plot = getattr(args, "plot", None)
    if plot and csv_text is not None:
        Path(plot).write_text(csv_text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
