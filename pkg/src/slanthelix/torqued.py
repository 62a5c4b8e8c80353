"""Torqued curves: <V, N_2> = theta (any real constant) for a torqued or concircular V."""

from __future__ import annotations

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

PARALLEL_TOL = 1e-8
T_PHI_MIN = 1e-8


class TorquedError(ValueError):
    pass


class PreconditionError(TorquedError):
    pass


@dataclass
class TorquedReport:
    theta_hat: float
    constancy_residual: float
    f_coeffs: dict  # "f1", "f3", ...
    g_coeffs: dict  # "g1", "g2", ...
    rho: np.ndarray
    case_label: str  # "a" V parallel to T, "b" V parallel to N_2, "c" generic
    is_torqued_curve: bool
    orthogonality_residual: float
    reconstruction_residual: float
    generative_reconstruction_residual: float
    field_label: str
    tol: float
    system_residuals: Optional[SystemResiduals] = None
    case_checks: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    angle_samples: Optional[np.ndarray] = None

    @property
    def concircular(self) -> bool:
        return all(np.max(np.abs(v)) < self.tol for v in self.g_coeffs.values())

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat,
            "constancy_residual": self.constancy_residual,
            "case_label": self.case_label,
            "is_torqued_curve": self.is_torqued_curve,
            "orthogonality_residual": self.orthogonality_residual,
            "reconstruction_residual": self.reconstruction_residual,
            "generative_reconstruction_residual": self.generative_reconstruction_residual,
            "field_label": self.field_label,
            "tol": self.tol,
            "f_ranges": {k: [float(np.min(v)), float(np.max(v))] for k, v in self.f_coeffs.items()},
            "g_ranges": {k: [float(np.min(v)), float(np.max(v))] for k, v in self.g_coeffs.items()},
            "rho_range": [float(np.min(self.rho)), float(np.max(self.rho))],
            "case_checks": self.case_checks,
            "system_residuals": self.system_residuals.to_dict() if self.system_residuals else None,
            "diagnostics": list(self.diagnostics),
        }


def torqued_report(curve: CurveSamples, frenet: FrenetData, fld: FieldSpec, tol: float = 1e-6,
                   form: str = "corrected") -> TorquedReport:
    """Decompose V and its generative field W in the Frenet frame and test <V, N_2> = const."""
    diagnostics = []
    cls = classify_field(fld, frenet.points, tol=max(tol, default_tol(fld)))
    if cls.label not in ("torqued", "concircular", "recurrent"):
        msg = f"field is classified {cls.label!r} along the curve, not torqued or concircular; continuing"
        warnings.warn(msg, stacklevel=2)
        diagnostics.append(msg)
    v = fld(frenet.points)
    g = frenet.metric.g(frenet.points)
    vv = ginner(g, v, v)
    fc = components(frenet, v)
    gc = components(frenet, cls.W)
    f_coeffs = {"f1": fc[:, 0]}
    for j in range(2, fc.shape[1]):
        f_coeffs[f"f{j + 1}"] = fc[:, j]
    g_coeffs = {f"g{j + 1}": gc[:, j] for j in range(gc.shape[1])}
    ortho = float(np.max(np.abs(np.sum(fc * gc, axis=1))))
    recon = float(np.max(reconstruction_error(frenet, v, fc)))
    recon_w = float(np.max(reconstruction_error(frenet, cls.W, gc)))
    scale = max(float(np.max(vv)), 1e-300)
    checks: dict = {}

    if frenet.order == 1 or np.max(np.abs(vv - fc[:, 0] ** 2)) < PARALLEL_TOL * scale:
        case = "a"
        angles = fc[:, 1] if fc.shape[1] > 1 else np.zeros(len(vv))
        theta = 0.0
        kap_max = float(np.max(frenet.kappa1)) if frenet.order > 1 else 0.0
        df = arclength_derivative(frenet, fc[:, 0])
        checks = {"parallel_to_T": True, "geodesic": kap_max < tol, "max_kappa1": kap_max,
                  "T_f_minus_rho": max_interior(df - cls.rho)}
    else:
        angles = fc[:, 1]
        theta = float(np.mean(angles))
        if np.max(np.abs(vv - angles**2)) < PARALLEL_TOL * scale:
            case = "b"
            checks = {"parallel_to_N2": True, "order_two": frenet.order == 2,
                      "kappa1_f2_plus_rho": max_interior(frenet.kappa1 * angles + cls.rho),
                      "max_abs_kappa2": float(np.max(np.abs(frenet.kappa(2)))) if frenet.dim > 2 else 0.0}
        else:
            case = "c"
    constancy = float(np.max(np.abs(angles - theta)))
    report = TorquedReport(theta, constancy, f_coeffs, g_coeffs, cls.rho, case, constancy < tol, ortho, recon,
                           recon_w, cls.label, tol, None, checks, diagnostics, angles)
    if case != "a":
        try:
            report.system_residuals = system_residuals_torqued(curve, frenet, fld, report, tol, form)
        except SystemMismatchError as exc:
            diagnostics.append(str(exc))
    return report


def system_residuals_torqued(curve: CurveSamples, frenet: FrenetData, fld: FieldSpec, report: TorquedReport,
                             tol: float = 1e-6, form: str = "corrected", sampled_angle: bool = False) -> SystemResiduals:
    """Residuals of the frame equations of nabla_T V along a torqued curve.

    With ``omega(T) = g_1`` the torse-forming identity reads
    nabla_T V = rho T + g_1 V. ``form="printed"`` instead uses
    rho (T + g_1 V) on the tangent line and -rho g_1 f_j on the others, which
    agrees with the corrected form only for concircular fields (g = 0).

    ``sampled_angle=True`` uses the measured <V, N_2> (and its derivative) in
    place of the constant theta, which turns the lines into identities valid
    along any curve.
    """
    if form not in ("corrected", "printed"):
        raise ValueError("form must be 'corrected' or 'printed'")
    if report.case_label == "a":
        return SystemResiduals("not_applicable", notes=["V is parallel to T (geodesic case)"])
    k = frenet.n_frame
    if k < 2:
        raise SystemMismatchError("the structure equations need at least T and N_2")
    n = len(frenet.samples)
    coeffs = np.zeros((n, k))
    coeffs[:, 0] = report.f_coeffs["f1"]
    coeffs[:, 1] = report.angle_samples if sampled_angle else report.theta_hat
    for j in range(2, k):
        coeffs[:, j] = report.f_coeffs[f"f{j + 1}"]
    gmat = np.stack([report.g_coeffs[f"g{j + 1}"] for j in range(k)], axis=1)
    g1 = gmat[:, 0]
    rho = report.rho
    lhs = frenet_derivative_components(frenet, coeffs, frozen=() if sampled_angle else (1,))
    concircular = float(np.max(np.abs(gmat))) < tol
    if concircular:
        rhs = np.zeros((n, k))
        rhs[:, 0] = rho
        name = "concircular"
    elif form == "corrected":
        rhs = g1[:, None] * coeffs
        rhs[:, 0] += rho
        name = "torqued_3d" if frenet.dim == 3 else "torqued_general"
    else:
        rhs = -(rho * g1)[:, None] * coeffs
        rhs[:, 0] = rho * (1.0 + coeffs[:, 0] * g1)
        name = ("torqued_3d" if frenet.dim == 3 else "torqued_general") + "_printed"
    resid = lhs - rhs
    out = SystemResiduals(name)
    for label, j in zip(line_labels(k), range(k)):
        out.lines[label] = max_interior(resid[:, j])
    if not concircular:
        out.lines["orthogonality"] = max_interior(np.sum(coeffs * gmat, axis=1))
    out.reduced = reduced_lines(frenet, k)
    if k < frenet.dim:
        out.notes.append(f"frame has {k} of {frenet.dim} vectors; lines beyond N{k} not evaluated")
    return out


def concircular_ode_residual(frenet: FrenetData, rho_samples, theta: float) -> float:
    """Max residual of theta T(kappa (1 + phi^2) / T(phi)) + T(rho / T(phi)) + theta kappa phi, phi = tau/kappa."""
    if frenet.order < 3:
        raise PreconditionError(f"the concircular curve equation needs order 3, got {frenet.order}")
    kap, tau = frenet.kappa1, frenet.tau
    rho = np.broadcast_to(np.asarray(rho_samples, dtype=float), kap.shape)
    phi = tau / kap
    dphi = arclength_derivative(frenet, phi)
    interior = np.isfinite(dphi)
    small = interior & (np.abs(dphi) < T_PHI_MIN)
    if small.any():
        i = int(np.flatnonzero(small)[0])
        raise PreconditionError(f"T(phi) vanishes at s={frenet.samples[i]:.6g} (|T(phi)|={abs(dphi[i]):.2e})")
    q1 = kap * (1.0 + phi**2) / dphi
    q2 = rho / dphi
    resid = theta * arclength_derivative(frenet, q1) + arclength_derivative(frenet, q2) + theta * kap * phi
    return max_interior(resid)
