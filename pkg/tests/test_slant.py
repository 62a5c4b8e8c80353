import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import curve_from_sympy, random_expressions, rotated, rotation
from slanthelix.curvegeo import curve_from_expressions, frenet_apparatus, reparametrize_arclength
from slanthelix.fields import builtin_field
from slanthelix.manifold import builtin_metric
from slanthelix.slant import (
    SlantError,
    angle_function,
    classify_euclidean_slant,
    ratio_law_check,
    slant_report,
)
from slanthelix.synthesis import builtin_curve, synthesize_slant_from_phi
from slanthelix.verify import BRANCH_D

PUNCT = builtin_metric("punctured_euclidean", 3)
RADIAL = builtin_field("radial_unit", PUNCT)
LOG_SPIRAL = ["t*cos(log(t))/sqrt(2)", "0", "t*sin(log(t))/sqrt(2)"]


def _frenet(curve):
    return curve, frenet_apparatus(curve)


def test_log_spiral_angle_is_constant():
    c, fr = _frenet(builtin_curve("log_spiral"))
    a = angle_function(c, fr, RADIAL)
    assert np.allclose(a, -1 / math.sqrt(2), atol=1e-9)


def test_log_spiral_report():
    c, fr = _frenet(builtin_curve("log_spiral"))
    rep = slant_report(c, fr, RADIAL)
    assert rep.is_slant_helix and rep.case == 3
    assert abs(rep.theta_hat - 3 * math.pi / 4) < 1e-9
    assert rep.system_residuals.name == "anti_torqued_3d"
    assert rep.system_residuals.passed(1e-8)
    assert rep.unit_identity_residual < 1e-10 and rep.reconstruction_residual < 1e-10
    assert np.allclose(rep.rho * fr.samples, math.sqrt(2), atol=1e-9)


def test_rectifying_curve_uses_orthogonal_system_and_ratio_law():
    c, fr = _frenet(builtin_curve("rectifying"))
    rep = slant_report(c, fr, RADIAL)
    assert abs(rep.cos_theta) < 1e-8
    assert rep.system_residuals.name == "anti_torqued_3d_orthogonal"
    assert rep.system_residuals.max() < 1e-6
    c_hat, resid = ratio_law_check(fr, rep)
    assert abs(c_hat - 1.0) < 1e-6 and resid < 1e-6


def test_generic_curve_is_not_slant_and_fails_the_system():
    c, fr = _frenet(curve_from_sympy(random_expressions(np.random.default_rng(5)), "punctured_euclidean"))
    rep = slant_report(c, fr, RADIAL)
    assert not rep.is_slant_helix
    assert rep.system_residuals.max() > 1e-3
    # the unit and reconstruction identities hold for any curve
    assert rep.unit_identity_residual < 1e-10 and rep.reconstruction_residual < 1e-10


def test_circle_about_origin_is_normal_parallel_case():
    c, fr = _frenet(builtin_curve("circle_origin", [2.0]))
    rep = slant_report(c, fr, RADIAL)
    assert rep.case == 2 and rep.is_slant_helix
    assert abs(rep.cos_theta + 1) < 1e-9
    assert rep.case_checks["order_two"] and rep.case_checks["rho_plus_cos_kappa1"] < 1e-9
    assert rep.system_residuals is None


def test_hyperbolic_vertical_line_is_tangent_parallel_case():
    hyp = builtin_metric("hyperbolic_upper_half", 3)
    c, fr = _frenet(builtin_curve("hyperbolic_vertical_line"))
    rep = slant_report(c, fr, builtin_field("hyperbolic_em", hyp))
    assert rep.case == 1 and rep.is_slant_helix
    assert rep.cos_theta == 0.0 and rep.case_checks["geodesic"]


def test_constant_axis_warns_but_reports():
    e3 = builtin_metric("euclidean", 3)
    c = reparametrize_arclength(curve_from_expressions(["cos(t)", "sin(t)", "t"], (0, 4), e3), 101)
    fr = frenet_apparatus(c)
    with pytest.warns(UserWarning, match="not anti_torqued"):
        rep = slant_report(c, fr, builtin_field("constant", e3, [0, 0, 1]))
    assert rep.diagnostics and rep.axis_label == "concircular"
    assert abs(rep.cos_theta) < 1e-9


@given(st.tuples(*[st.floats(-3, 3)] * 3))
def test_rotation_equivariance_of_the_angle(axis):
    Q = rotation(axis)
    c = curve_from_sympy(rotated(LOG_SPIRAL, Q), "punctured_euclidean", (1, 4), 61)
    rep = slant_report(*_frenet(c), RADIAL)
    assert abs(rep.cos_theta + 1 / math.sqrt(2)) < 1e-8


def test_reflection_keeps_the_angle():
    c = curve_from_sympy(rotated(LOG_SPIRAL, np.diag([1.0, -1.0, 1.0])), "punctured_euclidean", (1, 4), 61)
    c, fr = _frenet(c)
    rep = slant_report(c, fr, RADIAL)
    assert abs(rep.cos_theta + 1 / math.sqrt(2)) < 1e-8
    assert rep.system_residuals.max() < 1e-6


def test_ratio_law_errors():
    c, fr = _frenet(builtin_curve("log_spiral"))
    with pytest.raises(SlantError):
        ratio_law_check(fr, slant_report(c, fr, RADIAL))
    e4 = builtin_metric("punctured_euclidean", 4)
    c4 = reparametrize_arclength(curve_from_expressions(["cos(t)", "sin(t)", "cos(2*t)/2", "1+sin(2*t)/2"],
                                                        (0, 2), e4), 81)
    fr4 = frenet_apparatus(c4)
    with pytest.raises(SlantError):
        ratio_law_check(fr4, slant_report(c4, fr4, builtin_field("radial_unit", e4)))


@pytest.mark.parametrize("name, branch", [("circle_origin", "circle_origin"), ("log_spiral", "log_spiral"),
                                          ("rectifying", "rectifying")])
def test_branch_of_builtin_curves(name, branch):
    c, fr = _frenet(builtin_curve(name))
    e = classify_euclidean_slant(c, fr)
    assert e.branch == branch and e.branch_letter == "abc"[["circle_origin", "log_spiral", "rectifying"].index(name)]


def test_log_spiral_branch_fits_linear_phi():
    c, fr = _frenet(builtin_curve("log_spiral"))
    e = classify_euclidean_slant(c, fr)
    assert abs(e.slope - 1 / math.sqrt(2)) < 1e-8 and abs(e.intercept) < 1e-7


def test_synthesized_curve_is_generic_branch():
    c, fr = _frenet(synthesize_slant_from_phi(BRANCH_D))
    e = classify_euclidean_slant(c, fr, 1e-4)
    assert e.branch == "generic" and e.branch_letter == "d"
    assert e.kappa_residual < 1e-6 and e.tau_residual < 1e-4


def test_non_slant_curve_has_no_branch():
    c, fr = _frenet(curve_from_sympy(random_expressions(np.random.default_rng(8)), "punctured_euclidean"))
    e = classify_euclidean_slant(c, fr)
    assert e.branch == "none" and e.branch_letter == "-"


def test_classification_needs_euclidean_space():
    c, fr = _frenet(builtin_curve("hyperbolic_vertical_line"))
    with pytest.raises(SlantError):
        classify_euclidean_slant(c, fr)
