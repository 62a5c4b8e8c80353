"""Vector fields on charts and their torse-forming classification.

A field V is torse-forming when nabla_X V = rho X + omega(X) V for all X. At a
point the covariant derivatives along an orthonormal frame give m*m scalar
equations in the m + 1 unknowns (rho, omega(e_1), ..., omega(e_m)), solved in
least squares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RBFInterpolator

from ._numerics import ginner
from .manifold import FD_STEP, ChartMetric, as_points, christoffel_batch, warping

FIELD_NAMES = ("radial_unit", "hyperbolic_em", "concircular_affine", "constant", "twisted_torqued")
LABELS = ("anti_torqued", "torqued", "concircular", "recurrent", "torse_forming_general")


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    metric: ChartMetric
    eval: Callable[[np.ndarray], np.ndarray]
    # (n, m) -> (n, m, m), entry [n, i, j] = d_j V^i
    analytic_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"
    params: tuple = ()

    def __call__(self, points) -> np.ndarray:
        pts = self.metric.check(points)
        return np.asarray(self.eval(pts), dtype=float)

    def jacobian(self, points) -> np.ndarray:
        pts = self.metric.check(points)
        if self.analytic_jacobian is not None:
            return np.asarray(self.analytic_jacobian(pts), dtype=float)
        n, m = pts.shape
        out = np.empty((n, m, m))
        for j in range(m):
            step = np.zeros_like(pts)
            h = FD_STEP * np.maximum(1.0, np.abs(pts[:, j]))
            step[:, j] = h
            vp = self(self.metric.check(pts + step, "stencil point"))
            vm = self(self.metric.check(pts - step, "stencil point"))
            out[:, :, j] = (vp - vm) / (2.0 * h[:, None])
        return out

    def covariant_derivative(self, points, x) -> np.ndarray:
        """nabla_X V at each point for tangent vectors x (n, m)."""
        pts = self.metric.check(points)
        x = np.broadcast_to(np.asarray(x, dtype=float), pts.shape)
        gam = christoffel_batch(self.metric, pts)
        return np.einsum("nij,nj->ni", self.jacobian(pts), x) + np.einsum("nkij,ni,nj->nk", gam, x, self(pts))


def _require(metric: ChartMetric, allowed: tuple, name: str):
    if metric.name not in allowed:
        raise FieldError(f"field {name!r} needs a metric in {allowed}, got {metric.name!r}")


def builtin_field(name: str, metric: ChartMetric, params=()) -> FieldSpec:
    m = metric.dim
    params = tuple(float(p) for p in params)

    if name == "radial_unit":
        _require(metric, ("punctured_euclidean",), name)

        def ev(p):
            return p / np.linalg.norm(p, axis=1, keepdims=True)

        def jac(p):
            r = np.linalg.norm(p, axis=1)
            u = p / r[:, None]
            return (np.eye(m)[None] - np.einsum("ni,nj->nij", u, u)) / r[:, None, None]

        return FieldSpec(metric, ev, jac, name, params)

    if name == "hyperbolic_em":
        _require(metric, ("hyperbolic_upper_half",), name)

        def ev(p):
            v = np.zeros_like(p)
            v[:, -1] = -p[:, -1]
            return v

        def jac(p):
            j = np.zeros((p.shape[0], m, m))
            j[:, -1, -1] = -1.0
            return j

        return FieldSpec(metric, ev, jac, name, params)

    if name == "concircular_affine":
        _require(metric, ("euclidean", "punctured_euclidean"), name)
        rho = params[0] if params else 1.0
        v = np.array(params[1:]) if len(params) > 1 else np.zeros(m)
        if v.shape != (m,):
            raise FieldError(f"concircular_affine takes [rho, v_1..v_{m}], got {len(params)} values")

        def ev(p):
            return rho * p + v

        def jac(p):
            return np.broadcast_to(rho * np.eye(m), (p.shape[0], m, m)).copy()

        return FieldSpec(metric, ev, jac, name, (rho,) + tuple(v))

    if name == "constant":
        _require(metric, ("euclidean", "punctured_euclidean"), name)
        v = np.array(params) if params else np.eye(m)[0]
        if v.shape != (m,) or not np.any(v):
            raise FieldError(f"constant field takes a nonzero vector of length {m}")

        def ev(p):
            return np.broadcast_to(v, p.shape).copy()

        def jac(p):
            return np.zeros((p.shape[0], m, m))

        return FieldSpec(metric, ev, jac, name, tuple(v))

    if name == "twisted_torqued":
        _require(metric, ("warped_interval_product",), name)
        a = np.array(params) if params else np.ones(m - 1)
        if a.shape != (m - 1,):
            raise FieldError(f"twisted_torqued takes {m - 1} exponent coefficients for mu")
        wp = metric.params

        def ev(p):
            lam, _ = warping(wp, p[:, 0])
            out = np.zeros_like(p)
            out[:, 0] = lam * np.exp(p[:, 1:] @ a)
            return out

        def jac(p):
            lam, dlam = warping(wp, p[:, 0])
            mu = np.exp(p[:, 1:] @ a)
            j = np.zeros((p.shape[0], m, m))
            j[:, 0, 0] = dlam * mu
            j[:, 0, 1:] = (lam * mu)[:, None] * a
            return j

        return FieldSpec(metric, ev, jac, name, tuple(a))

    raise FieldError(f"unknown field {name!r}; choose from {', '.join(FIELD_NAMES)}")


def field_from_samples(metric: ChartMetric, points, vectors, name: str = "samples") -> FieldSpec:
    """Field interpolated from scattered (point, vector) pairs; Jacobian by finite differences."""
    pts = metric.check(points)
    vec = np.asarray(vectors, dtype=float)
    if vec.shape != pts.shape:
        raise FieldError("points and vectors must have the same shape")
    interp = RBFInterpolator(pts, vec, kernel="thin_plate_spline", degree=2)
    return FieldSpec(metric, interp, None, name)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns e_a: Gram-Schmidt of the chart basis under g."""
    m = g.shape[0]
    e = np.zeros((m, m))
    for a in range(m):
        v = np.eye(m)[a].copy()
        for _ in range(2):
            for b in range(a):
                v -= (e[:, b] @ g @ v) * e[:, b]
        e[:, a] = v / np.sqrt(v @ g @ v)
    return e


@dataclass
class TorseFit:
    rho: float
    omega: np.ndarray  # chart components omega_i = omega(d_i)
    W: np.ndarray  # generative vector, chart components
    residual: float
    V: np.ndarray
    point: np.ndarray


def torse_forming_fit(fld: FieldSpec, p) -> TorseFit:
    metric = fld.metric
    pt = as_points(p, metric.dim)
    v = fld(pt)[0]
    g = metric.g(pt)[0]
    vnorm = np.sqrt(v @ g @ v)
    if not vnorm > 0.0:
        raise FieldError(f"field vanishes at {pt[0].tolist()}")
    m = metric.dim
    e = orthonormal_frame(g)
    e_inv = np.linalg.inv(e)
    nabla = fld.covariant_derivative(np.repeat(pt, m, axis=0), e.T)  # row a: nabla_{e_a} V
    d = nabla @ e_inv.T  # orthonormal components
    vc = e_inv @ v
    a = np.zeros((m * m, m + 1))
    b = d.reshape(-1)
    for i in range(m):
        a[i * m : (i + 1) * m, 0] = np.eye(m)[i]
        a[i * m : (i + 1) * m, 1 + i] = vc
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < m + 1:
        raise FieldError(f"degenerate least-squares system at {pt[0].tolist()}")
    residual = float(np.linalg.norm(a @ sol - b))
    omega_frame = sol[1:]
    W = e @ omega_frame
    omega = omega_frame @ e_inv
    return TorseFit(float(sol[0]), omega, W, residual, v, pt[0])


@dataclass
class TorseFormingReport:
    rho: np.ndarray
    omega: np.ndarray
    W: np.ndarray
    residual: np.ndarray
    label: str
    proper_flag: bool
    passing: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    tol: float = 1e-6
    points: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None


def default_tol(fld: FieldSpec) -> float:
    """1e-6 with an analytic Jacobian, 1e-3 when it comes from finite differences."""
    return 1e-6 if fld.analytic_jacobian is not None else 1e-3


def classify_field(fld: FieldSpec, sample_points, tol: Optional[float] = None) -> TorseFormingReport:
    """Fit every sample point and pick the most specific class that holds within ``tol``.

    ``tol`` defaults to :func:`default_tol`.

    Torqued and anti-torqued labels additionally need a generating form that is
    not identically zero on the samples; otherwise concircular/recurrent apply.
    """
    if tol is None:
        tol = default_tol(fld)
    pts = as_points(sample_points, fld.metric.dim)
    if len(pts) == 0:
        raise FieldError("no sample points")
    fits = []
    for i, p in enumerate(pts):
        try:
            fits.append(torse_forming_fit(fld, p))
        except ValueError as exc:
            raise FieldError(f"fit failed at sample {i} ({p.tolist()}): {exc}") from exc
    rho = np.array([f.rho for f in fits])
    omega = np.array([f.omega for f in fits])
    W = np.array([f.W for f in fits])
    V = np.array([f.V for f in fits])
    resid = np.array([f.residual for f in fits])
    g = fld.metric.g(pts)
    omega_norm = np.sqrt(np.maximum(ginner(g, W, W), 0.0))
    anti = W + rho[:, None] * V
    stats = {
        "max_residual": float(resid.max()),
        "max_omega_norm": float(omega_norm.max()),
        "max_abs_rho": float(np.abs(rho).max()),
        "max_abs_VW": float(np.abs(ginner(g, V, W)).max()),
        "max_W_plus_rhoV": float(np.sqrt(np.maximum(ginner(g, anti, anti), 0.0)).max()),
    }
    passing = []
    if stats["max_residual"] < tol:
        concircular = stats["max_omega_norm"] < tol
        if not concircular and stats["max_W_plus_rhoV"] < tol:
            passing.append("anti_torqued")
        if not concircular and stats["max_abs_VW"] < tol:
            passing.append("torqued")
        if concircular:
            passing.append("concircular")
        if stats["max_abs_rho"] < tol:
            passing.append("recurrent")
        passing.append("torse_forming_general")
        label = next(lab for lab in LABELS if lab in passing)
    else:
        label = "not_torse_forming"
    proper = bool(np.all(np.abs(rho) > tol) and np.all(omega_norm > tol))
    return TorseFormingReport(rho, omega, W, resid, label, proper, passing, stats, tol, pts, V)
