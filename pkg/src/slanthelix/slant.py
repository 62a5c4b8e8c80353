"""Anti-torqued slant helices.

A unit-speed curve is a slant helix for an anti-torqued axis V when
<V, N_2> is constant along it. This module measures that angle, decomposes V
in the Frenet frame, evaluates the structure equations the decomposition must
satisfy, and sorts Euclidean examples (radial axis) into their four families.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._numerics import ginner
from ._systems import (
    SystemMismatchError,
    SystemResiduals,
    arclength_derivative,
    components,
    frenet_derivative_components,
    line_labels,
    max_interior,
    reconstruction_error,
    reduced_lines,
)
from .curvegeo import CurveSamples, FrenetData
from .fields import FieldSpec, classify_field, default_tol

log = logging.getLogger(__name__)

PARALLEL_TOL = 1e-8


class SlantError(ValueError):
    pass


def angle_function(curve: CurveSamples, frenet: FrenetData, axis: FieldSpec) -> np.ndarray:
    """<V(gamma(s)), N_2(s)> per sample.

    For a geodesic (no principal normal) the tangential product <V, T> is
    returned instead; callers can tell from ``frenet.order == 1``.
    """
    if axis.metric.dim != frenet.dim:
        raise SlantError("axis and curve live in different dimensions")
    v = axis(frenet.points)
    g = frenet.metric.g(frenet.points)
    if frenet.order == 1:
        log.info("order-1 curve: returning the tangential product <V, T>")
        return ginner(g, v, frenet.tangent)
    return ginner(g, v, frenet.normal)


@dataclass
class SlantReport:
    angle_samples: np.ndarray
    cos_theta: float
    theta_hat: float
    constancy_residual: float
    coeffs: dict  # "f1", "f3", ... per sample
    rho: np.ndarray
    is_slant_helix: bool
    case: int  # 1: V parallel to T, 2: V parallel to N_2, 3: generic decomposition
    unit_identity_residual: float
    reconstruction_residual: float
    axis_label: str
    tol: float
    system_residuals: Optional[SystemResiduals] = None
    case_checks: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "cos_theta": self.cos_theta,
            "theta_hat": self.theta_hat,
            "constancy_residual": self.constancy_residual,
            "is_slant_helix": self.is_slant_helix,
            "case": self.case,
            "unit_identity_residual": self.unit_identity_residual,
            "reconstruction_residual": self.reconstruction_residual,
            "axis_label": self.axis_label,
            "tol": self.tol,
            "coeff_ranges": {k: [float(np.min(v)), float(np.max(v))] for k, v in self.coeffs.items()},
            "rho_range": [float(np.min(self.rho)), float(np.max(self.rho))],
            "case_checks": self.case_checks,
            "diagnostics": list(self.diagnostics),
        }
        out["system_residuals"] = self.system_residuals.to_dict() if self.system_residuals else None
        return out


def slant_report(curve: CurveSamples, frenet: FrenetData, axis: FieldSpec, tol: float = 1e-6) -> SlantReport:
    """Angle, decomposition coefficients and structure-equation residuals."""
    diagnostics = []
    cls = classify_field(axis, frenet.points, tol=max(tol, default_tol(axis)))
    if cls.label != "anti_torqued":
        msg = f"axis is classified {cls.label!r} along the curve, not anti_torqued; continuing"
        warnings.warn(msg, stacklevel=2)
        diagnostics.append(msg)
    rho = cls.rho
    v = axis(frenet.points)
    g = frenet.metric.g(frenet.points)
    vv = ginner(g, v, v)
    comp = components(frenet, v)
    unit_resid = float(np.max(np.abs(np.sum(comp**2, axis=1) - 1.0))) if frenet.complete else float("nan")
    recon = float(np.max(reconstruction_error(frenet, v, comp)))
    tangential = comp[:, 0]
    case_checks = {}

    if frenet.order == 1 or np.max(np.abs(vv - tangential**2)) < PARALLEL_TOL * np.max(vv):
        # V parallel to T: the curve must be a geodesic and the normal angle is pi/2
        case = 1
        angles = tangential if frenet.order == 1 else comp[:, 1]
        cos_t = 0.0
        constancy = float(np.max(np.abs(vv - tangential**2)))
        kap_max = float(np.max(frenet.kappa1)) if frenet.order > 1 else 0.0
        case_checks = {"parallel_to_T": True, "geodesic": kap_max < tol, "max_kappa1": kap_max}
        is_slant = case_checks["geodesic"] and constancy < tol
        coeffs = {"f1": tangential}
        report = SlantReport(angles, cos_t, float(np.pi / 2), constancy, coeffs, rho, bool(is_slant), case,
                             unit_resid, recon, cls.label, tol, None, case_checks, diagnostics)
        return report

    angles = comp[:, 1]
    cos_t = float(np.mean(angles))
    constancy = float(np.max(np.abs(angles - cos_t)))
    theta_hat = float(np.arccos(np.clip(cos_t, -1.0, 1.0)))
    coeffs = {"f1": comp[:, 0]}
    for j in range(2, comp.shape[1]):
        coeffs[f"f{j + 1}"] = comp[:, j]
    if np.max(np.abs(vv - angles**2)) < PARALLEL_TOL * np.max(vv):
        # V parallel to N_2: order 2 and rho = -cos(theta) kappa_1
        case = 2
        order2 = frenet.order == 2
        rk = max_interior(rho + cos_t * frenet.kappa1)
        case_checks = {"parallel_to_N2": True, "order_two": order2, "rho_plus_cos_kappa1": rk}
    else:
        case = 3
    report = SlantReport(angles, cos_t, theta_hat, constancy, coeffs, rho, constancy < tol, case,
                         unit_resid, recon, cls.label, tol, None, case_checks, diagnostics)
    if case == 3:
        try:
            report.system_residuals = system_residuals_anti(curve, frenet, axis, report)
        except SystemMismatchError as exc:
            diagnostics.append(str(exc))
    return report


def system_residuals_anti(curve: CurveSamples, frenet: FrenetData, axis: FieldSpec, report: SlantReport,
                          orthogonal_tol: float = 1e-6) -> SystemResiduals:
    """Residuals of nabla_T V = rho (T - f_1 V) written in the Frenet frame.

    The N_2 coefficient is the fitted constant cos(theta). In dimension three
    with cos(theta) = 0 the reduced three-line system is reported.
    """
    if report.case == 1:
        return SystemResiduals("not_applicable", notes=["V is parallel to T (geodesic case)"])
    if report.case == 2:
        return SystemResiduals("not_applicable", notes=["V is parallel to N_2 (order-2 case)"])
    m = frenet.dim
    k = frenet.n_frame
    if k < 2:
        raise SystemMismatchError("the structure equations need at least T and N_2")
    coeffs = np.zeros((len(frenet.samples), k))
    coeffs[:, 0] = report.coeffs["f1"]
    coeffs[:, 1] = report.cos_theta
    for j in range(2, k):
        coeffs[:, j] = report.coeffs[f"f{j + 1}"]
    lhs = frenet_derivative_components(frenet, coeffs, frozen=(1,))
    rho = report.rho[:, None]
    rhs = -rho * coeffs[:, :1] * coeffs
    rhs[:, 0] += report.rho
    resid = lhs - rhs
    if m == 3:
        name = "anti_torqued_3d_orthogonal" if abs(report.cos_theta) < orthogonal_tol else "anti_torqued_3d"
    else:
        name = "anti_torqued_general"
    out = SystemResiduals(name)
    for label, j in zip(line_labels(k), range(k)):
        out.lines[label] = max_interior(resid[:, j])
    out.reduced = reduced_lines(frenet, k)
    if k < m:
        out.notes.append(f"frame has {k} of {m} vectors; lines beyond N{k} not evaluated")
    return out


def ratio_law_check(frenet: FrenetData, report: SlantReport, tol: float = 1e-6) -> tuple[float, float]:
    """Fit c in tau/kappa = c f / sqrt(1 - f^2) for cos(theta) = 0 in dimension three."""
    if frenet.dim != 3:
        raise SlantError("the curvature ratio law is stated for dimension three")
    if abs(report.cos_theta) > tol:
        raise SlantError(f"ratio law needs cos(theta) = 0, got {report.cos_theta:.3g}")
    if frenet.order < 2:
        raise SlantError("geodesic: tau/kappa is undefined")
    f = report.coeffs["f1"]
    if np.any(np.abs(f) < 1e-12):
        raise SlantError("tangential component f vanishes on the grid")
    if np.any(np.abs(f) >= 1.0):
        raise SlantError("|f| must stay below 1")
    q = frenet.tau / frenet.kappa1 * np.sqrt(1.0 - f**2) / f
    c_hat = float(np.mean(q))
    return c_hat, float(np.max(np.abs(q - c_hat)))


BRANCHES = ("circle_origin", "log_spiral", "rectifying", "generic")


@dataclass
class EuclideanSlantReport:
    branch: str
    phi: np.ndarray
    g: np.ndarray
    kappa_residual: float
    tau_residual: float
    F: np.ndarray
    cos_theta: float
    constancy_residual: float
    passing: list
    branch_checks: dict
    tol: float
    slope: float = float("nan")
    intercept: float = float("nan")

    @property
    def branch_letter(self) -> str:
        return "abcd"[BRANCHES.index(self.branch)] if self.branch in BRANCHES else "-"

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "branch_letter": self.branch_letter,
            "passing": list(self.passing),
            "cos_theta": self.cos_theta,
            "constancy_residual": self.constancy_residual,
            "kappa_residual": self.kappa_residual,
            "tau_residual": self.tau_residual,
            "slope": self.slope,
            "intercept": self.intercept,
            "phi_range": [float(self.phi.min()), float(self.phi.max())],
            "g_range": [float(self.g.min()), float(self.g.max())],
            "checks": self.branch_checks,
            "tol": self.tol,
        }


def classify_euclidean_slant(curve: CurveSamples, frenet: FrenetData, tol: float = 1e-6) -> EuclideanSlantReport:
    """Place a Euclidean slant helix (radial unit axis) in one of four families.

    Priority: circle about the origin, planar logarithmic spiral, rectifying
    curve (cos theta = 0), generic (curvature and torsion laws from phi).
    """
    if frenet.metric.name not in ("euclidean", "punctured_euclidean") or frenet.dim != 3:
        raise SlantError("classification needs Euclidean 3-space")
    if frenet.order < 2:
        raise SlantError("classification needs a curve of order at least 2")
    x = frenet.points
    phi = np.linalg.norm(x, axis=1)
    if np.any(phi == 0.0):
        raise SlantError("the curve passes through the origin")
    t_, n_ = frenet.tangent, frenet.normal
    b_ = frenet.binormal
    pp = np.einsum("ni,ni->n", x, t_)  # phi phi'
    dphi = pp / phi
    cos_s = np.einsum("ni,ni->n", x, n_) / phi
    c = float(np.mean(cos_s))
    constancy = float(np.max(np.abs(cos_s - c)))
    gcoef = np.einsum("ni,ni->n", x, b_)
    kap, tau = frenet.kappa1, frenet.tau
    s = frenet.samples
    checks: dict = {}
    passing = []

    phi_dev = float(np.max(np.abs(phi - phi.mean())))
    checks["a"] = {"phi_deviation": phi_dev, "max_abs_g": float(np.max(np.abs(gcoef))), "cos_plus_one": abs(c + 1.0)}
    if phi_dev < tol * max(1.0, phi.mean()) and checks["a"]["max_abs_g"] < tol and abs(c + 1.0) < tol:
        passing.append("circle_origin")

    slope = intercept = float("nan")
    sin_t = float(np.sqrt(max(1.0 - c * c, 0.0)))
    max_tau = float(np.max(np.abs(tau)))
    checks["b"] = {"max_abs_tau": max_tau, "min_abs_dphi": float(np.min(np.abs(dphi)))}
    if max_tau < tol and checks["b"]["min_abs_dphi"] > tol:
        slope, intercept = np.polyfit(s, phi, 1)
        slope, intercept = float(slope), float(intercept)
        fit_dev = float(np.max(np.abs(phi - (slope * s + intercept))))
        kappa_law = float(np.max(np.abs(kap + c / (slope * s + intercept))))
        checks["b"].update(slope=slope, intercept=intercept, fit_deviation=fit_dev,
                           slope_vs_sin=abs(abs(slope) - sin_t), kappa_law_residual=kappa_law)
        if fit_dev < tol and abs(abs(slope) - sin_t) < tol and kappa_law < tol and constancy < tol:
            passing.append("log_spiral")

    max_gn = float(np.max(np.abs(cos_s * phi)))
    checks["c"] = {"max_abs_gamma_dot_N": max_gn, "abs_cos": abs(c)}
    if abs(c) < tol and max_gn < tol:
        passing.append("rectifying")

    # curvature law from phi and the torsion ODE, derivatives by finite differences
    dpp = arclength_derivative(frenet, pp)
    kappa_resid = np.full_like(s, np.nan)
    tau_resid = np.full_like(s, np.nan)
    big_f = (c * c + dpp - 1.0) * dphi
    if abs(c) > tol:
        kappa_resid = kap - (dpp - 1.0) / (c * phi)
        dtau = arclength_derivative(frenet, tau)
        dF = arclength_derivative(frenet, big_f)
        ok = np.abs(big_f) > 1e-8
        tau_resid = np.where(ok, dtau - tau / np.where(ok, big_f, 1.0) * (dF + c * c * phi * tau**2), np.nan)
    k_res, t_res = max_interior(kappa_resid), max_interior(tau_resid)
    checks["d"] = {"kappa_residual": k_res, "tau_residual": t_res,
                   "min_abs_tau": float(np.min(np.abs(tau))), "min_abs_F": float(np.nanmin(np.abs(big_f)))}
    if abs(c) > tol and constancy < tol and k_res < tol and (t_res < tol or not np.isfinite(t_res)) and checks["d"]["min_abs_tau"] > tol:
        passing.append("generic")

    branch = next((b for b in BRANCHES if b in passing), "none")
    return EuclideanSlantReport(branch, phi, gcoef, k_res, t_res, big_f, c, constancy, passing, checks, tol,
                                slope, intercept)
