"""Curves in a chart: arc-length reparametrization, Frenet frames and curvatures.

The Frenet frame is obtained by Gram-Schmidt (two passes) in the metric on the
covariant tower T, nabla_T T, nabla_T^2 T, ... . For analytically backed
curves the tower is assembled from exact curve derivatives plus the jet of the
Christoffel symbols along the curve; sampled curves use fourth-order central
differences on a uniform arc-length grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.integrate import cumulative_simpson
from scipy.interpolate import make_interp_spline

from ._numerics import callable_derivative, fd_weights, central_offsets, ginner, grid_derivative, is_uniform
from ._symbolic import vector_derivatives
from .manifold import ChartMetric, christoffel_batch, connection_term

log = logging.getLogger(__name__)

RANK_TOL = 1e-7
# step for finite differences of analytic callbacks along the curve
ANALYTIC_STEP = 2e-3


class CurveError(ValueError):
    """Irregular or otherwise unusable curve input."""


class FrenetOrderError(CurveError):
    """The Frenet order is not constant along the grid."""

    def __init__(self, message: str, split_index: int, split_s: float):
        super().__init__(message)
        self.split_index = split_index
        self.split_s = split_s


@dataclass
class CurveSamples:
    """A curve sampled on a strictly increasing grid, optionally with exact derivatives.

    ``analytic(s, k)`` returns the k-th derivative at the parameters ``s`` as an
    array of shape ``(len(s), m)`` for ``k <= max_order``; it must be valid on
    the open ``support`` interval.
    """

    metric: ChartMetric
    grid: np.ndarray
    points: np.ndarray
    analytic: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    max_order: int = 0
    arclength: bool = False
    support: tuple[float, float] = (-np.inf, np.inf)
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        if self.grid.ndim != 1 or len(self.grid) < 2:
            raise CurveError("a curve needs at least two samples")
        if np.any(np.diff(self.grid) <= 0):
            bad = int(np.flatnonzero(np.diff(self.grid) <= 0)[0]) + 1
            raise CurveError(f"grid is not strictly increasing at sample {bad} (t={self.grid[bad]})")
        if self.points.shape != (len(self.grid), self.metric.dim):
            raise CurveError(f"points must have shape {(len(self.grid), self.metric.dim)}, got {self.points.shape}")
        self.metric.check(self.points, "curve sample")

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def derivative(self, k: int, s=None) -> np.ndarray:
        if self.analytic is not None and k <= self.max_order:
            return self.analytic(self.grid if s is None else np.atleast_1d(s), k)
        if s is not None:
            raise CurveError("sampled curves only provide derivatives at their grid nodes")
        if k == 0:
            return self.points
        if not is_uniform(self.grid):
            raise CurveError("finite-difference derivatives need a uniform grid; reparametrize first")
        return grid_derivative(self.points, self.step, k)

    def speed(self, s=None) -> np.ndarray:
        pts = self.derivative(0, s)
        d1 = self.derivative(1, s)
        ok = np.isfinite(d1).all(axis=1)
        out = np.full(len(pts), np.nan)
        out[ok] = np.sqrt(ginner(self.metric.g(pts[ok]), d1[ok], d1[ok]))
        return out

    def resample(self, n: int, lo: Optional[float] = None, hi: Optional[float] = None) -> "CurveSamples":
        if self.analytic is None:
            raise CurveError("only analytic curves can be resampled")
        lo = self.grid[0] if lo is None else lo
        hi = self.grid[-1] if hi is None else hi
        grid = np.linspace(lo, hi, n)
        return CurveSamples(self.metric, grid, self.analytic(grid, 0), self.analytic, self.max_order,
                            self.arclength, self.support, self.name, dict(self.meta))


def curve_from_expressions(
    exprs: Sequence,
    t_range: tuple[float, float],
    metric: ChartMetric,
    n: int = 201,
    symbol: str = "t",
    max_order: int = 4,
    support: tuple[float, float] = (-np.inf, np.inf),
    arclength: bool = False,
    name: str = "",
) -> CurveSamples:
    """Curve given by closed-form coordinate expressions in one parameter."""
    if len(exprs) != metric.dim:
        raise CurveError(f"{len(exprs)} coordinate expressions for a {metric.dim}-dimensional chart")
    deriv = vector_derivatives(exprs, symbol, max_order)
    grid = np.linspace(t_range[0], t_range[1], n)
    return CurveSamples(metric, grid, deriv(grid, 0), deriv, max_order, arclength, support, name)


def curve_from_points(t, points, metric: ChartMetric, name: str = "") -> CurveSamples:
    return CurveSamples(metric, np.asarray(t, dtype=float), np.asarray(points, dtype=float), name=name)


# ---------------------------------------------------------------------------
# arc length


def _adaptive_chebyshev(fn, domain, tol: float = 1e-13) -> Chebyshev:
    for deg in (32, 64, 128, 256, 512):
        cheb = Chebyshev.interpolate(fn, deg, domain=domain)
        c = np.abs(cheb.coef)
        if c[-4:].max() <= tol * max(c.max(), 1e-300):
            return cheb
    log.debug("Chebyshev fit did not converge to %.1e on %s", tol, domain)
    return cheb


def _compose_jets(c_derivs: list[np.ndarray], t_derivs: list[np.ndarray], k: int) -> np.ndarray:
    """k-th derivative of c(t(s)) from the derivatives of c and of t."""
    n = t_derivs[0].shape[0]
    delta = np.zeros((n, k + 1))
    for j in range(1, k + 1):
        delta[:, j] = t_derivs[j] / factorial(j)
    power = np.zeros((n, k + 1))
    power[:, 0] = 1.0
    total = np.zeros(c_derivs[0].shape + (k + 1,))
    for q in range(k + 1):
        total += (c_derivs[q] / factorial(q))[:, :, None] * power[:, None, :]
        nxt = np.zeros_like(power)
        for a in range(k + 1):
            nxt[:, a:] += power[:, a : a + 1] * delta[:, : k + 1 - a]
        power = nxt
    return total[:, :, k] * factorial(k)


def _reparametrize_analytic(curve: CurveSamples, n_out: int) -> CurveSamples:
    ta, tb = float(curve.grid[0]), float(curve.grid[-1])
    pad = 0.05 * (tb - ta)
    lo = ta - pad if ta - pad > curve.support[0] else ta
    hi = tb + pad if tb + pad < curve.support[1] else tb
    metric = curve.metric

    def speed(t):
        return curve.speed(t)

    if np.any(~(speed(np.linspace(lo, hi, 257)) > 0.0)):
        raise CurveError("curve is not regular: speed vanishes")
    vcheb = _adaptive_chebyshev(speed, [lo, hi])
    arc = vcheb.integ(lbnd=lo)
    s0 = float(arc(ta))
    length = float(arc(tb)) - s0
    table_t = np.linspace(lo, hi, 4001)
    table_s = arc(table_t) - s0

    def inverse(s):
        t = np.interp(s, table_s, table_t)
        for _ in range(8):
            t = t - (arc(t) - s0 - s) / vcheb(t)
        return t

    tcheb = _adaptive_chebyshev(inverse, [table_s[0], table_s[-1]])
    tders = [tcheb.deriv(j) if j else tcheb for j in range(curve.max_order + 1)]
    base = curve.analytic

    def analytic(s, k):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        t = tcheb(s)
        if k == 0:
            return base(t, 0)
        c_derivs = [base(t, q) for q in range(k + 1)]
        t_derivs = [td(s) for td in tders[: k + 1]]
        return _compose_jets(c_derivs, t_derivs, k)

    grid = np.linspace(0.0, length, n_out)
    out = CurveSamples(metric, grid, analytic(grid, 0), analytic, curve.max_order, True,
                       (float(table_s[0]), float(table_s[-1])), curve.name, dict(curve.meta))
    out.meta["parameter_of_arclength"] = tcheb
    return out


def _reparametrize_sampled(curve: CurveSamples, n_out: int) -> CurveSamples:
    t, x = curve.grid, curve.points
    if len(t) < 8:
        raise CurveError("need at least 8 samples to reparametrize a sampled curve")
    spline = make_interp_spline(t, x, k=5)
    dspline = spline.derivative()
    metric = curve.metric

    def speed(tt):
        d = dspline(tt)
        return np.sqrt(ginner(metric.g(spline(tt)), d, d))

    fine = np.linspace(t[0], t[-1], 40 * len(t) + 1)
    v = speed(fine)
    if np.any(~(v > 0.0)):
        idx = int(np.searchsorted(t, fine[np.flatnonzero(~(v > 0.0))[0]]))
        raise CurveError(f"curve is not regular near sample {idx}: speed vanishes")
    cum = cumulative_simpson(v, x=fine, initial=0.0)
    arc = make_interp_spline(fine, cum, k=5)
    s_out = np.linspace(0.0, cum[-1], n_out)
    tt = np.interp(s_out, cum, fine)
    for _ in range(4):
        tt = np.clip(tt - (arc(tt) - s_out) / speed(tt), t[0], t[-1])
    return CurveSamples(metric, s_out, spline(tt), arclength=True, name=curve.name, meta=dict(curve.meta))


def reparametrize_arclength(curve: CurveSamples, n_out: int = 201) -> CurveSamples:
    """Return the curve on a uniform arc-length grid with ``n_out`` samples.

    Analytic curves that are already unit speed are only resampled.
    """
    if curve.analytic is not None and curve.max_order >= 1:
        v = curve.speed()
        if np.any(~(v > 0.0)):
            idx = int(np.flatnonzero(~(v > 0.0))[0])
            raise CurveError(f"curve is not regular at sample {idx}: speed vanishes")
        if np.max(np.abs(v - 1.0)) < 1e-10:
            out = curve.resample(n_out)
            out.arclength = True
            return out
        return _reparametrize_analytic(curve, n_out)
    return _reparametrize_sampled(curve, n_out)


# ---------------------------------------------------------------------------
# Frenet apparatus


@dataclass
class FrenetData:
    order: int
    frames: np.ndarray  # (n, k, m): frame vectors N_1 = T, N_2, ...
    curvatures: np.ndarray  # (n, order - 1)
    samples: np.ndarray  # arc length of each reported sample
    points: np.ndarray
    metric: ChartMetric
    index: np.ndarray  # positions in the source curve grid
    residuals: dict = field(default_factory=dict)
    oriented: bool = False

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def n_frame(self) -> int:
        return self.frames.shape[1]

    @property
    def complete(self) -> bool:
        return self.n_frame == self.dim

    @property
    def tangent(self) -> np.ndarray:
        return self.frames[:, 0]

    @property
    def normal(self) -> np.ndarray:
        if self.n_frame < 2:
            raise CurveError("order-1 curve has no principal normal")
        return self.frames[:, 1]

    @property
    def binormal(self) -> np.ndarray:
        if self.n_frame < 3:
            raise CurveError("frame has no third vector")
        return self.frames[:, 2]

    def kappa(self, i: int) -> np.ndarray:
        """i-th curvature (1-based); identically zero past the detected order."""
        if 1 <= i < self.order:
            return self.curvatures[:, i - 1]
        if i < self.dim:
            return np.zeros(len(self.samples))
        raise IndexError(f"curvature index {i} out of range for dimension {self.dim}")

    @property
    def kappa1(self) -> np.ndarray:
        return self.kappa(1)

    @property
    def tau(self) -> np.ndarray:
        return self.kappa(2)


def _christoffel_jet(curve: CurveSamples, s: Optional[np.ndarray], order: int) -> list[np.ndarray]:
    metric = curve.metric
    if s is None:
        pts = curve.points
    else:
        pts = curve.analytic(s, 0)
    n, m = pts.shape
    if metric.flat:
        return [np.zeros((n, m, m, m))] * (order + 1)
    jet = [christoffel_batch(metric, pts)]
    for a in range(1, order + 1):
        if s is None:
            jet.append(grid_derivative(jet[0], curve.step, a))
        else:
            jet.append(callable_derivative(lambda x: christoffel_batch(metric, curve.analytic(x, 0)), s, a, ANALYTIC_STEP))
    return jet


def _covariant_tower(curve: CurveSamples, s: Optional[np.ndarray], count: int) -> np.ndarray:
    """E_1 = c', E_{k+1} = nabla_{c'} E_k for k < count; shape (n, count, m)."""
    if s is None:
        jet = [curve.derivative(k) for k in range(1, count + 1)]
    else:
        jet = [curve.analytic(s, k) for k in range(1, count + 1)]
    gam = _christoffel_jet(curve, s, max(count - 2, 0))
    e1 = jet
    tower = [jet[0]]
    current = jet
    for _ in range(1, count):
        nxt = []
        for j in range(len(current) - 1):
            acc = current[j + 1].copy()
            for a in range(j + 1):
                for b in range(j + 1 - a):
                    d = j - a - b
                    coef = factorial(j) // (factorial(a) * factorial(b) * factorial(d))
                    acc = acc + coef * connection_term(gam[a], e1[b], current[d])
            nxt.append(acc)
        current = nxt
        tower.append(current[0])
    return np.stack(tower, axis=1)


def _gram_schmidt(g: np.ndarray, vecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, count, m = vecs.shape
    q = np.zeros_like(vecs)
    r = np.zeros((n, count))
    for k in range(count):
        v = vecs[:, k].copy()
        for _ in range(2):
            for j in range(k):
                v -= ginner(g, q[:, j], v)[:, None] * q[:, j]
        nrm = np.sqrt(np.maximum(ginner(g, v, v), 0.0))
        r[:, k] = nrm
        safe = np.where(nrm > 0.0, nrm, 1.0)
        q[:, k] = np.where((nrm > 0.0)[:, None], v / safe[:, None], 0.0)
    return q, r


def _complete(g: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unit vector g-orthogonal to the given frame vectors, from the best chart basis vector."""
    n, k, m = q.shape
    best = np.zeros((n, m))
    best_norm = np.full(n, -1.0)
    for e in np.eye(m):
        v = np.broadcast_to(e, (n, m)).copy()
        for _ in range(2):
            for j in range(k):
                v -= ginner(g, q[:, j], v)[:, None] * q[:, j]
        nrm = np.sqrt(np.maximum(ginner(g, v, v), 0.0))
        better = (nrm > best_norm) & (nrm > 0.0)
        best[better] = v[better] / nrm[better, None]
        best_norm = np.where(better, nrm, best_norm)
    return best


def _frames(curve: CurveSamples, s: Optional[np.ndarray], order: Optional[int], rank_tol: float):
    """Frames and curvatures on ``s`` (analytic) or on the grid (sampled).

    Returns (frames, curvatures, per-sample order, valid mask, oriented flag).
    """
    m = curve.dim
    tower = _covariant_tower(curve, s, m)
    valid = np.isfinite(tower).all(axis=(1, 2))
    pts = curve.points if s is None else curve.analytic(s, 0)
    n = len(pts)
    g = np.zeros((n, m, m))
    g[valid] = curve.metric.g(pts[valid])
    tower[~valid] = 0.0
    g[~valid] = np.eye(m)
    q, r = _gram_schmidt(g, tower)
    with np.errstate(invalid="ignore", divide="ignore"):  # invalid rows are masked below
        ratio = r / r[:, :1]
    below = ratio < rank_tol
    per_sample = np.where(below.any(axis=1), below.argmax(axis=1), m)
    r_used = int(per_sample[valid][0]) if order is None and valid.any() else order
    if r_used is None:
        r_used = m
    with np.errstate(invalid="ignore", divide="ignore"):
        curv = r[:, 1:r_used] / r[:, : r_used - 1]
    frames = q[:, :r_used]
    oriented = False
    if m >= 3 and r_used >= m - 1:
        if r_used == m - 1:
            frames = np.concatenate([frames, _complete(g, frames)[:, None, :]], axis=1)
        flip = np.linalg.det(frames) < 0.0
        frames[flip, -1] *= -1.0
        if r_used == m:
            curv[flip, -1] *= -1.0
        oriented = True
    return frames, curv, per_sample, valid, oriented


def frenet_apparatus(curve: CurveSamples, rank_tol: float = RANK_TOL, residuals: bool = True) -> FrenetData:
    """Frenet frame, curvatures and order of a unit-speed curve."""
    if not curve.arclength:
        raise CurveError("Frenet data needs an arc-length parametrized curve; call reparametrize_arclength")
    analytic = curve.analytic is not None and curve.max_order >= curve.dim
    if not analytic and not is_uniform(curve.grid):
        raise CurveError("sampled curves need a uniform arc-length grid")
    s = curve.grid if analytic else None
    speed = curve.speed(s)
    fin = np.isfinite(speed)
    speed_tol = 1e-6 if analytic else 1e-3
    if np.any(np.abs(speed[fin] - 1.0) > speed_tol):
        raise CurveError(f"curve is not unit speed (max |speed - 1| = {np.max(np.abs(speed[fin] - 1.0)):.2e})")

    frames, curv, per_sample, valid, oriented = _frames(curve, s, None, rank_tol)
    idx = np.flatnonzero(valid)
    if idx.size == 0:
        raise CurveError("no sample admits a full derivative stencil")
    orders = per_sample[idx]
    if np.any(orders != orders[0]):
        split = int(idx[np.flatnonzero(orders != orders[0])[0]])
        raise FrenetOrderError(
            f"Frenet order changes from {orders[0]} along the curve at sample {split} (s={curve.grid[split]:.6g})",
            split, float(curve.grid[split]))
    order = int(orders[0])
    data = FrenetData(order, frames[idx], curv[idx], curve.grid[idx], curve.points[idx], curve.metric, idx,
                      oriented=oriented)
    if residuals:
        data.residuals = frenet_residuals(curve, data, rank_tol)
    return data


def frenet_residuals(curve: CurveSamples, data: FrenetData, rank_tol: float = RANK_TOL) -> dict:
    """Max orthonormality defect and max g-norm defect of each Frenet formula."""
    m = curve.dim
    g = curve.metric.g(data.points)
    gram = np.einsum("nai,nij,nbj->nab", data.frames, g, data.frames)
    out = {"orthonormality": float(np.max(np.abs(gram - np.eye(data.n_frame))))}

    if curve.analytic is not None and curve.max_order >= m:
        h = ANALYTIC_STEP
        offsets = central_offsets(1, 6)
        reach = offsets[-1] * h * (2 if not curve.metric.flat else 1)
        keep = (data.samples - reach > curve.support[0]) & (data.samples + reach < curve.support[1])
        s = data.samples[keep]
        w = fd_weights(offsets, 1)
        dframes = sum(wj * _frames(curve, s + o * h, data.order, rank_tol)[0] for o, wj in zip(offsets, w)) / h
    else:
        dframes = grid_derivative(data.frames, float(data.samples[1] - data.samples[0]))
        keep = np.isfinite(dframes).all(axis=(1, 2))
        dframes = dframes[keep]
    if not keep.any():
        return out
    frames = data.frames[keep]
    tangent = frames[:, 0]
    gam = christoffel_batch(curve.metric, data.points[keep])
    gk = g[keep]
    kap = [None] + [data.kappa(i)[keep] if i < m else None for i in range(1, m)]
    k_count = data.n_frame
    for i in range(k_count):
        cov = dframes[:, i] + connection_term(gam, tangent, frames[:, i])
        expected = np.zeros_like(cov)
        if i >= 1:
            expected -= kap[i][:, None] * frames[:, i - 1]
        if i + 1 < k_count:
            expected += kap[i + 1][:, None] * frames[:, i + 1]
        diff = cov - expected
        out[f"N{i + 1}"] = float(np.max(np.sqrt(np.maximum(ginner(gk, diff, diff), 0.0))))
    return out


def frenet_at(curve: CurveSamples, s, order: int, rank_tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Frames and curvatures of an analytic unit-speed curve at arbitrary parameters."""
    if curve.analytic is None:
        raise CurveError("pointwise Frenet data needs an analytic curve")
    frames, curv, _, _, _ = _frames(curve, np.atleast_1d(np.asarray(s, dtype=float)), order, rank_tol)
    return frames, curv


def curvature_function(curve: CurveSamples, i: int, order: int) -> Callable[[np.ndarray], np.ndarray]:
    def kappa(s):
        scalar = np.ndim(s) == 0
        _, curv = frenet_at(curve, s, order)
        val = curv[:, i - 1] if i < order else np.zeros(curv.shape[0])
        return float(val[0]) if scalar else val

    return kappa


@dataclass
class SpecialCurve:
    geodesic: bool
    circle: bool
    circle_curvature: Optional[float]
    circle_radius: Optional[float]
    general_helix: bool
    helix_ratio: Optional[float]
    max_kappa1: float


def detect_special(frenet: FrenetData, tol: float = 1e-6) -> SpecialCurve:
    """Flags for geodesics, Riemannian circles and constant curvature ratio."""
    if len(frenet.samples) == 0:
        raise CurveError("empty Frenet data")
    k1 = frenet.kappa1
    max_k1 = float(np.max(np.abs(k1)))
    geodesic = frenet.order == 1 or max_k1 < tol
    circle = False
    R = radius = None
    if frenet.order == 2 and not geodesic:
        spread = float(np.max(k1) - np.min(k1))
        second = frenet.residuals.get("N2", 0.0)
        if spread < tol and second < tol:
            circle = True
            R = float(np.mean(k1))
            radius = 1.0 / R
    helix = False
    ratio = None
    if frenet.order >= 3:
        q = frenet.tau / frenet.kappa1
        if float(np.max(q) - np.min(q)) < tol:
            helix = True
            ratio = float(np.mean(q))
    return SpecialCurve(geodesic, circle, R, radius, helix, ratio, max_k1)
