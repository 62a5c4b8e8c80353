import math
import warnings

import numpy as np
import pytest

from helpers import rotation
from slanthelix.curvegeo import frenet_apparatus
from slanthelix.slant import classify_euclidean_slant
from slanthelix.synthesis import (
    CURVE_NAMES,
    DegenerateCurveError,
    SynthesisConfig,
    SynthesisError,
    builtin_curve,
    frenet_integrate,
    synthesize_concircular,
    synthesize_slant_from_phi,
)
from slanthelix.verify import BRANCH_D


@pytest.mark.parametrize("name, params, s, point", [
    ("log_spiral", (), 1.0, (1 / math.sqrt(2), 0.0, 0.0)),
    ("cone_loxodrome", (), 4.0, (1.0, math.sqrt(3), 0.0)),
    ("circle_origin", (2.0,), 0.0, (2.0, 0.0, 0.0)),
    ("hyperbolic_vertical_line", (), 0.0, (0.0, 0.0, 1.0)),
])
def test_builtin_curve_values(name, params, s, point):
    c = builtin_curve(name, params, s_range=(s, s + 1), n=11)
    assert np.allclose(c.points[0], point, atol=1e-12)
    assert c.arclength and np.max(np.abs(c.speed() - 1)) < 1e-9


@pytest.mark.parametrize("name", CURVE_NAMES)
def test_builtin_curves_have_clean_frames(name):
    fr = frenet_apparatus(builtin_curve(name, n=101))
    assert fr.residuals["orthonormality"] < 1e-10


def test_builtin_curve_errors():
    with pytest.raises(SynthesisError):
        builtin_curve("spiral")
    with pytest.raises(SynthesisError):
        builtin_curve("log_spiral", s_range=(-1, 1))
    with pytest.raises(SynthesisError):
        builtin_curve("circle_origin", [-1.0])
    with pytest.raises(SynthesisError):
        builtin_curve("rectifying", [1.0, 2.0, 2.0])


def test_integrated_circle():
    c = frenet_integrate(0.5, 0.0, (0, 4 * math.pi), n=101)
    assert np.allclose(np.linalg.norm(c.points - [0.0, 2.0, 0.0], axis=1), 2.0, atol=1e-9)
    assert np.allclose(c.points[-1], c.points[0], atol=1e-8)


def test_integrated_helix_is_congruent_to_closed_form():
    # helix (2 cos t, 2 sin t, t): kappa = 2/5, tau = 1/5
    c = frenet_integrate("2/5", "1/5", (0, 5), n=51)
    s = c.grid / math.sqrt(5)
    exact = np.stack([2 * np.cos(s), 2 * np.sin(s), s], 1)
    e_frame = np.array([[0, 2, 1], [-math.sqrt(5), 0, 0], [0, -1, 2]]) / math.sqrt(5)
    # move the closed form so that it starts at the origin with the identity frame
    moved = (exact - exact[0]) @ e_frame.T
    assert np.max(np.linalg.norm(moved - c.points, axis=1)) < 1e-8


def test_curvature_one_over_s_is_recovered():
    c = frenet_integrate(lambda s: 1 / s, lambda s: 0.3 / s, (1, 4), n=121)
    fr = frenet_apparatus(c)
    assert np.max(np.abs(fr.kappa1 * fr.samples - 1)) < 1e-8
    assert np.max(np.abs(fr.tau * fr.samples - 0.3)) < 1e-8


def test_loxodrome_invariants_reproduce_the_loxodrome():
    ref = builtin_curve("cone_loxodrome", s_range=(1, 5), n=81)
    fr = frenet_apparatus(ref)
    c = frenet_integrate("sqrt(39)/(2*s)", "-3/(2*s)", (1, 5), initial_point=ref.points[0],
                         initial_frame=fr.frames[0], n=81)
    assert np.max(np.linalg.norm(c.points - ref.points, axis=1)) < 1e-7


def test_invariants_do_not_depend_on_initial_frame():
    Q = rotation((0.3, -1.2, 0.7))
    a = frenet_apparatus(frenet_integrate("1 + s/3", "cos(s)", (0, 2), n=61))
    b = frenet_apparatus(frenet_integrate("1 + s/3", "cos(s)", (0, 2), initial_point=[1, 2, 3],
                                          initial_frame=Q.T, n=61))
    assert np.allclose(a.curvatures, b.curvatures, atol=1e-8)


def test_frenet_integrate_errors():
    with pytest.raises(SynthesisError):
        frenet_integrate("s - 1", "0", (0, 2))
    with pytest.raises(SynthesisError):
        frenet_integrate(1.0, 0.0, initial_frame=np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(SynthesisError):
        frenet_integrate(1.0, 0.0, initial_frame=2 * np.eye(3))


def test_branch_d_synthesis_passes_post_verification():
    c = synthesize_slant_from_phi(BRANCH_D)
    pv = c.meta["post_verification"]
    assert pv["passed"] and pv["max_angle_deviation"] < 1e-6
    e = classify_euclidean_slant(c, frenet_apparatus(c), 1e-4)
    assert e.branch == "generic"
    assert abs(e.cos_theta + 0.5) < 1e-6


def test_affine_phi_gives_log_spiral_branch():
    cfg = SynthesisConfig(theta=3 * math.pi / 4, phi="s/sqrt(2)", s_range=(1.0, 4.0))
    c = synthesize_slant_from_phi(cfg)
    e = classify_euclidean_slant(c, frenet_apparatus(c), 1e-5)
    assert e.branch == "log_spiral"
    assert np.allclose(np.linalg.norm(c.points, axis=1), c.grid / math.sqrt(2), atol=1e-8)


@pytest.mark.parametrize("cfg", [
    SynthesisConfig(theta=math.pi / 2, phi="s"),
    SynthesisConfig(theta=2.0, phi="2"),
    SynthesisConfig(theta=2.0, phi="s - 2"),
    SynthesisConfig(theta=2.0, phi=None),
    SynthesisConfig(theta=2 * math.pi / 3, phi="sqrt(s**2 + 1)", tau0=0.1),
])
def test_slant_synthesis_rejects_bad_inputs(cfg):
    with pytest.raises(SynthesisError):
        synthesize_slant_from_phi(cfg)


def test_post_verification_warns_on_failure(monkeypatch):
    import slanthelix.synthesis as syn

    monkeypatch.setattr(syn, "SLANT_VERIFY_TOL", 0.0)
    with pytest.warns(UserWarning):
        c = synthesize_slant_from_phi(BRANCH_D)
    assert not c.meta["post_verification"]["passed"]


def test_concircular_synthesis_keeps_theta():
    c = synthesize_concircular("2 - s/4", 1.0, 1.0, 1.0, (0.0, 1.0))
    assert c.meta["post_verification"]["max_theta_deviation"] < 1e-9
    assert len(c.meta["field_params"]) == 4


def test_concircular_synthesis_errors():
    with pytest.raises(SynthesisError):
        synthesize_concircular("2 - s/4", 0.0, 1.0, 1.0)
    with pytest.raises(DegenerateCurveError):
        synthesize_concircular("2", 1.0, 1.0, 1.0)
    with pytest.raises(SynthesisError):
        synthesize_concircular("s - 0.5", 1.0, 1.0, 1.0)
    with pytest.raises(SynthesisError):
        synthesize_concircular("1 + s", 1.0, 1.0, 1.0)
    with pytest.raises(SynthesisError):
        # theta < 0 makes f1' = theta kappa + rho pull f1 into zero
        synthesize_concircular("2 + s/4", -1.0, 0.1, 0.5, (0.0, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        synthesize_concircular("2 - s/4", 1.0, 1.0, 1.0, (0.0, 0.5))
