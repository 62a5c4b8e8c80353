"""Riemannian metrics on coordinate charts.

A :class:`ChartMetric` evaluates g_ij on batches of chart points of shape
``(n, m)``. Christoffel symbols are assembled from analytic component
derivatives when the metric carries them and from central differences
otherwise. Every evaluation point, including stencil points, is checked
against the domain predicate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from ._numerics import callable_derivative, fd_weights, grid_derivative

if TYPE_CHECKING:
    from .curvegeo import CurveSamples

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)

METRIC_NAMES = ("euclidean", "punctured_euclidean", "hyperbolic_upper_half", "warped_interval_product")


class DomainError(ValueError):
    """A point (or stencil point) lies outside the chart domain."""


class MetricError(ValueError):
    """Bad metric construction or a singular metric."""


def as_points(p, dim: int) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got shape {np.shape(p)}")
    return arr


@dataclass(frozen=True)
class ChartMetric:
    dim: int
    components: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    params: tuple = ()
    # (n, m) -> (n, m, m, m), entry [n, l, i, j] = d_l g_ij
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    flat: bool = False

    def check(self, points, what: str = "point") -> np.ndarray:
        pts = as_points(points, self.dim)
        ok = np.asarray(self.domain(pts), dtype=bool)
        if not ok.all():
            idx = int(np.flatnonzero(~ok)[0])
            raise DomainError(f"{what} {idx} at {pts[idx].tolist()} is outside the domain of {self.name}")
        return pts

    def g(self, points) -> np.ndarray:
        pts = self.check(points)
        return np.asarray(self.components(pts), dtype=float)

    def dg(self, points) -> np.ndarray:
        pts = self.check(points)
        if self.derivative is not None:
            return np.asarray(self.derivative(pts), dtype=float)
        n, m = pts.shape
        out = np.empty((n, m, m, m))
        for l in range(m):
            h = FD_STEP * np.maximum(1.0, np.abs(pts[:, l]))
            step = np.zeros_like(pts)
            step[:, l] = h
            gp = np.asarray(self.components(self.check(pts + step, "stencil point")))
            gm = np.asarray(self.components(self.check(pts - step, "stencil point")))
            out[:, l] = (gp - gm) / (2.0 * h)[:, None, None]
        return out


def _eye_batch(n: int, m: int) -> np.ndarray:
    return np.broadcast_to(np.eye(m), (n, m, m)).copy()


def _euclidean(dim: int, punctured: bool) -> ChartMetric:
    def components(p):
        return _eye_batch(p.shape[0], dim)

    def derivative(p):
        return np.zeros((p.shape[0], dim, dim, dim))

    if punctured:
        def domain(p):
            return np.linalg.norm(p, axis=1) > 0.0
        name = "punctured_euclidean"
    else:
        def domain(p):
            return np.ones(p.shape[0], dtype=bool)
        name = "euclidean"
    return ChartMetric(dim, components, domain, name, (), derivative, flat=True)


def _hyperbolic(dim: int) -> ChartMetric:
    def components(p):
        return _eye_batch(p.shape[0], dim) / p[:, -1, None, None] ** 2

    def derivative(p):
        out = np.zeros((p.shape[0], dim, dim, dim))
        out[:, -1] = -2.0 * _eye_batch(p.shape[0], dim) / p[:, -1, None, None] ** 3
        return out

    def domain(p):
        return p[:, -1] > 0.0

    return ChartMetric(dim, components, domain, "hyperbolic_upper_half", (), derivative)


def warping(params, t) -> tuple[np.ndarray, np.ndarray]:
    """Warping function lambda(t) = a exp(b t) and its derivative."""
    a, b = params[0], params[1]
    lam = a * np.exp(b * np.asarray(t, dtype=float))
    return lam, b * lam


def _warped(dim: int, params) -> ChartMetric:
    params = tuple(float(x) for x in (params or (1.0, 1.0, -1.0, 1.0)))
    if len(params) == 2:
        params = params + (-1.0, 1.0)
    if len(params) != 4:
        raise MetricError("warped_interval_product takes params [a, b, t_min, t_max]")
    a, b, t0, t1 = params
    if a <= 0.0 or b <= 0.0:
        raise MetricError(f"warping coefficients must be positive, got a={a}, b={b}")
    if not t0 < t1:
        raise MetricError(f"empty interval ({t0}, {t1})")

    def components(p):
        lam, _ = warping(params, p[:, 0])
        g = _eye_batch(p.shape[0], dim)
        g[:, 1:, 1:] *= (lam**2)[:, None, None]
        return g

    def derivative(p):
        lam, dlam = warping(params, p[:, 0])
        out = np.zeros((p.shape[0], dim, dim, dim))
        idx = np.arange(1, dim)
        out[:, 0, idx, idx] = (2.0 * lam * dlam)[:, None]
        return out

    def domain(p):
        return (p[:, 0] > t0) & (p[:, 0] < t1)

    return ChartMetric(dim, components, domain, "warped_interval_product", params, derivative)


def builtin_metric(name: str, dim: int = 3, params=()) -> ChartMetric:
    if dim < 2:
        raise MetricError(f"dimension must be at least 2, got {dim}")
    if name == "euclidean":
        return _euclidean(dim, punctured=False)
    if name == "punctured_euclidean":
        return _euclidean(dim, punctured=True)
    if name == "hyperbolic_upper_half":
        return _hyperbolic(dim)
    if name == "warped_interval_product":
        return _warped(dim, params)
    raise MetricError(f"unknown metric {name!r}; choose from {', '.join(METRIC_NAMES)}")


def christoffel_batch(metric: ChartMetric, points) -> np.ndarray:
    """Gamma^k_ij at each point, shape (n, m, m, m) indexed [n, k, i, j]."""
    pts = metric.check(points)
    n, m = pts.shape
    if metric.flat:
        return np.zeros((n, m, m, m))
    g = metric.g(pts)
    if np.any(np.abs(np.linalg.det(g)) < 1e-300) or np.any(np.linalg.cond(g) > 1e14):
        raise MetricError("metric is singular at one of the points")
    ginv = np.linalg.inv(g)
    dg = metric.dg(pts)
    # lowered[n, l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = np.einsum("nijl->nlij", dg) + np.einsum("njil->nlij", dg) - dg
    return 0.5 * np.einsum("nkl,nlij->nkij", ginv, lowered)


def christoffel(metric: ChartMetric, p) -> np.ndarray:
    return christoffel_batch(metric, p)[0]


def inner(metric: ChartMetric, p, u, v):
    """<u, v>_g at p; batched when p, u, v carry a leading sample axis."""
    single = np.ndim(p) == 1
    pts = as_points(p, metric.dim)
    u = np.asarray(u, dtype=float).reshape(-1, metric.dim)
    v = np.asarray(v, dtype=float).reshape(-1, metric.dim)
    if u.shape[0] not in (1, pts.shape[0]) or v.shape[0] not in (1, pts.shape[0]):
        raise ValueError("dimension mismatch between points and vectors")
    out = np.einsum("ni,nij,nj->n", np.broadcast_to(u, pts.shape), metric.g(pts), np.broadcast_to(v, pts.shape))
    return float(out[0]) if single else out


def connection_term(gamma: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Gamma^k_ij u^i w^j, batched."""
    return np.einsum("nkij,ni,nj->nk", gamma, u, w)


def covariant_derivative_along(
    metric: ChartMetric,
    curve: "CurveSamples",
    field_along,
    s: float,
    field_derivative: Optional[Callable] = None,
    one_sided: bool = False,
) -> np.ndarray:
    """(nabla_{c'} W)(s) = W'(s) + Gamma(c(s))(c'(s), W(s)).

    ``field_along`` is either a callable of the curve parameter or an array of
    per-sample vectors aligned with ``curve.grid``. In the latter case ``s``
    must be a grid node and W' comes from grid finite differences.
    """
    if callable(field_along):
        sv = np.array([float(s)])
        w = np.asarray(field_along(sv), dtype=float).reshape(1, -1)
        if field_derivative is not None:
            dw = np.asarray(field_derivative(sv), dtype=float).reshape(1, -1)
        else:
            dw = callable_derivative(lambda x: np.asarray(field_along(x)).reshape(len(x), -1), sv)
        c = curve.derivative(0, sv)
        dc = curve.derivative(1, sv)
    else:
        values = np.asarray(field_along, dtype=float)
        hits = np.flatnonzero(np.isclose(curve.grid, s, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise ValueError(f"s={s} is not a node of the sample grid")
        i = int(hits[0])
        n = len(curve.grid)
        h = curve.grid[1] - curve.grid[0]
        if 2 <= i < n - 2:
            dw = grid_derivative(values, h)[i : i + 1]
        elif one_sided:
            offs = tuple(range(0, 5)) if i < 2 else tuple(range(-4, 1))
            w5 = fd_weights(offs, 1)
            dw = sum(wj * values[i + o] for o, wj in zip(offs, w5))[None, :] / h
        else:
            raise ValueError(f"s={s} is at the grid boundary; pass one_sided=True to allow a one-sided stencil")
        w = values[i : i + 1]
        c = curve.derivative(0)[i : i + 1]
        dc = curve.derivative(1)[i : i + 1]
        if not one_sided and np.isnan(dc).any():
            raise ValueError(f"s={s} is too close to the grid boundary")
    gamma = christoffel_batch(metric, c)
    return (dw + connection_term(gamma, dc, w))[0]
