"""Acceptance criteria 1-9, one test each. Also runnable as a script for a pass/fail table."""

import math
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import curve_from_sympy, random_expressions, rotated, rotation  # noqa: E402
from slanthelix.curvegeo import curvature_function, frenet_apparatus  # noqa: E402
from slanthelix.fields import builtin_field, classify_field  # noqa: E402
from slanthelix.manifold import builtin_metric  # noqa: E402
from slanthelix.slant import classify_euclidean_slant, ratio_law_check, slant_report  # noqa: E402
from slanthelix.synthesis import (  # noqa: E402
    SynthesisConfig,
    builtin_curve,
    frenet_integrate,
    synthesize_concircular,
    synthesize_slant_from_phi,
)
from slanthelix.torqued import concircular_ode_residual, torqued_report  # noqa: E402
from slanthelix.verify import BRANCH_D, anti_torqued_unit_geodesic, example_suite, random_points  # noqa: E402

RESULTS: dict = {}
PUNCT = builtin_metric("punctured_euclidean", 3)
RADIAL = builtin_field("radial_unit", PUNCT)


def record(number, checks):
    """checks: list of (label, value, tol) with value < tol required, or (label, bool)."""
    failed = []
    for item in checks:
        label, value = item[0], item[1]
        ok = bool(value) if len(item) == 2 else bool(np.isfinite(value) and value < item[2])
        if not ok:
            failed.append(label if len(item) == 2 else f"{label}={value:.3g} (tol {item[2]:g})")
    RESULTS[number] = (not failed, "; ".join(failed) or "all checks within tolerance")
    return failed


@lru_cache(maxsize=None)
def _suite():
    return {c.name: c for c in example_suite()}


def test_criterion_1_log_spiral():
    c = builtin_curve("log_spiral")
    fr = frenet_apparatus(c)
    rep = slant_report(c, fr, RADIAL)
    failed = record(1, [
        ("kappa*s - 1", np.max(np.abs(fr.kappa1 * fr.samples - 1)), 1e-6),
        ("cos theta + 1/sqrt2", abs(rep.cos_theta + 1 / math.sqrt(2)), 1e-6),
        ("f1 - 1/sqrt2", np.max(np.abs(rep.coeffs["f1"] - 1 / math.sqrt(2))), 1e-6),
        ("g", np.max(np.abs(rep.coeffs["f3"])), 1e-6),
        *[(f"system line {k}", v, 1e-6) for k, v in rep.system_residuals.lines.items()],
    ])
    assert not failed, failed


def test_criterion_2_cone_loxodrome():
    c = builtin_curve("cone_loxodrome")
    fr = frenet_apparatus(c)
    rep = slant_report(c, fr, RADIAL)
    s = fr.samples
    abs_g = 3 * math.sqrt(3) / (2 * math.sqrt(13))
    suite = _suite()
    failed = record(2, [
        ("kappa*2s - sqrt39", np.max(np.abs(fr.kappa1 * 2 * s - math.sqrt(39))), 1e-6),
        ("tau*2s + 3", np.max(np.abs(fr.tau * 2 * s + 3)), 1e-6),
        ("cos theta + sqrt3/sqrt13", abs(rep.cos_theta + math.sqrt(3) / math.sqrt(13)), 1e-6),
        ("f1 - 1/2", np.max(np.abs(rep.coeffs["f1"] - 0.5)), 1e-6),
        ("rho*s - 2", np.max(np.abs(rep.rho * s - 2)), 1e-6),
        ("|g| - 3sqrt3/(2sqrt13)", np.max(np.abs(np.abs(rep.coeffs["f3"]) - abs_g)), 1e-6),
        *[(f"system line {k}", v, 1e-5) for k, v in rep.system_residuals.lines.items()],
        ("published rho flagged", not suite["cone_loxodrome.published_rho_times_s"].passed),
        ("published g flagged", not suite["cone_loxodrome.published_abs_g"].passed),
    ])
    assert not failed, failed


def test_criterion_3_field_classification():
    rng = np.random.default_rng(2024)
    pts = random_points("punctured_euclidean", 100, rng)
    rad = classify_field(RADIAL, pts)
    hyp = builtin_metric("hyperbolic_upper_half", 3)
    em = classify_field(builtin_field("hyperbolic_em", hyp), random_points("hyperbolic_upper_half", 100, rng))
    conc = classify_field(builtin_field("concircular_affine", builtin_metric("euclidean", 3), [1.5, 1, -2, 0.5]),
                          random_points("euclidean", 100, rng))
    warped = builtin_metric("warped_interval_product", 3)
    tw = classify_field(builtin_field("twisted_torqued", warped), random_points("warped_interval_product", 100, rng))
    failed = record(3, [
        ("radial_unit anti_torqued", rad.label == "anti_torqued"),
        ("rho*|p| - 1", np.max(np.abs(rad.rho * np.linalg.norm(pts, axis=1) - 1)), 1e-6),
        ("hyperbolic_em anti_torqued", em.label == "anti_torqued"),
        ("rho - 1", np.max(np.abs(em.rho - 1)), 1e-6),
        ("concircular_affine concircular", conc.label == "concircular"),
        ("omega norm", conc.stats["max_omega_norm"], 1e-8),
        ("twisted_torqued torqued", tw.label == "torqued"),
        ("<V,W>", tw.stats["max_abs_VW"], 1e-6),
    ])
    assert not failed, failed


def test_criterion_4_anti_torqued_unit_geodesic():
    rng = np.random.default_rng(7)
    checks = []
    candidates = [
        ("radial_unit", RADIAL, "punctured_euclidean"),
        ("hyperbolic_em", builtin_field("hyperbolic_em", builtin_metric("hyperbolic_upper_half", 3)),
         "hyperbolic_upper_half"),
        ("concircular_affine", builtin_field("concircular_affine", builtin_metric("euclidean", 3)), "euclidean"),
        ("twisted_torqued", builtin_field("twisted_torqued", builtin_metric("warped_interval_product", 3)),
         "warped_interval_product"),
    ]
    labeled = 0
    for name, fld, chart in candidates:
        pts = random_points(chart, 100, rng)
        if classify_field(fld, pts).label != "anti_torqued":
            continue
        labeled += 1
        unit, acc = anti_torqued_unit_geodesic(fld, pts)
        checks += [(f"{name} |<V,V>-1|", unit, 1e-6), (f"{name} |nabla_V V|", acc, 1e-6)]
    checks.append(("two anti_torqued fields found", labeled == 2))
    failed = record(4, checks)
    assert not failed, failed


def test_criterion_5_branch_recovery():
    def branch(curve, tol=1e-6):
        return classify_euclidean_slant(curve, frenet_apparatus(curve), tol)

    a = branch(builtin_curve("circle_origin"))
    b = branch(builtin_curve("log_spiral"))
    c = branch(builtin_curve("rectifying"))
    d = branch(synthesize_slant_from_phi(BRANCH_D), 1e-4)
    sin_t = math.sqrt(1 - b.cos_theta**2)
    failed = record(5, [
        ("circle_origin -> a", a.branch_letter == "a"),
        ("cos theta + 1", abs(a.cos_theta + 1), 1e-8),
        ("log_spiral -> b", b.branch_letter == "b"),
        ("|slope| - |sin theta|", abs(abs(b.slope) - sin_t), 1e-6),
        ("kappa law", b.branch_checks["b"]["kappa_law_residual"], 1e-6),
        ("rectifying -> c", c.branch_letter == "c"),
        ("|<gamma,N>|", c.branch_checks["c"]["max_abs_gamma_dot_N"], 1e-6),
        ("synthesized -> d", d.branch_letter == "d"),
        ("kappa law (d)", d.kappa_residual, 1e-4),
        ("tau law (d)", d.tau_residual, 1e-4),
    ])
    assert not failed, failed


def test_criterion_6_ratio_law():
    c = builtin_curve("rectifying")
    fr = frenet_apparatus(c)
    c_hat, resid = ratio_law_check(fr, slant_report(c, fr, RADIAL))
    failed = record(6, [("c - 1", abs(c_hat - 1), 1e-5), ("ratio-law residual", resid, 1e-5)])
    assert not failed, failed


def test_criterion_7_slant_synthesis_roundtrip():
    # phi = sqrt(s^2 + 1) gives (phi phi')' = 1, hence zero curvature, and the
    # position budget turns negative for s > sqrt(3): the synthesis rejects it.
    cfg = SynthesisConfig(theta=2 * math.pi / 3, phi="sqrt(s**2 + 1)", s_range=(1.0, 3.0), tau0=0.1)
    try:
        curve = synthesize_slant_from_phi(cfg)
    except Exception as exc:  # recorded, then re-raised as the test failure
        record(7, [(f"synthesis raised {type(exc).__name__}: {exc}", False)])
        raise
    rep = slant_report(curve, frenet_apparatus(curve), RADIAL)
    failed = record(7, [
        ("|cos theta_hat - cos(2pi/3)|", abs(rep.cos_theta - math.cos(2 * math.pi / 3)), 1e-4),
        ("constancy", rep.constancy_residual, 1e-4),
    ])
    assert not failed, failed


def test_criterion_8_concircular_construction():
    curve = synthesize_concircular("2 - s/4", 1.0, 1.0, 1.0, (0.0, 1.0))
    fr = frenet_apparatus(curve)
    fld = builtin_field("concircular_affine", curve.metric, curve.meta["field_params"])
    rep = torqued_report(curve, fr, fld)
    failed = record(8, [
        *[(f"system line {k}", v, 1e-5) for k, v in rep.system_residuals.lines.items()],
        ("concircular curve ODE", concircular_ode_residual(fr, rep.rho, rep.theta_hat), 1e-4),
    ])
    assert not failed, failed


def _frenet_residual(fr):
    return max(v for k, v in fr.residuals.items() if k != "orthonormality")


def test_criterion_9_frenet_property_suite():
    rng = np.random.default_rng(20240)
    checks = []
    for i in range(20):
        chart = "euclidean" if i % 2 == 0 else "hyperbolic_upper_half"
        exprs = random_expressions(rng, chart)
        curve = curve_from_sympy(exprs, chart, (0.0, 3.0), 121)
        fr = frenet_apparatus(curve)
        checks += [(f"curve {i} orthonormality", fr.residuals["orthonormality"], 1e-8),
                   (f"curve {i} Frenet formulas", _frenet_residual(fr), 1e-5)]
        if chart != "euclidean":
            continue
        s0, s1 = curve.grid[0], curve.grid[-1]
        rebuilt = frenet_integrate(curvature_function(curve, 1, 3), curvature_function(curve, 2, 3), (s0, s1),
                                   initial_point=curve.points[0], initial_frame=fr.frames[0], n=len(curve.grid))
        # one integration over the whole curve; its max distance bounds every unit window
        dist = np.max(np.linalg.norm(rebuilt.points - curve.points, axis=1))
        checks.append((f"curve {i} roundtrip distance", dist, 1e-4))
        Q = rotation(rng.normal(size=3))
        fr_rot = frenet_apparatus(curve_from_sympy(rotated(exprs, Q), chart, (0.0, 3.0), 121))
        checks.append((f"curve {i} rotation equivariance", np.max(np.abs(fr_rot.curvatures - fr.curvatures)), 1e-8))
    failed = record(9, checks)
    assert not failed, failed


def _main():
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except Exception:
                pass
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all(ok for ok, _ in RESULTS.values()) else 1


if __name__ == "__main__":
    sys.exit(_main())
