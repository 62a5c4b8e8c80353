"""Curve construction: closed-form examples and Frenet-system integration.

All constructions here live in Euclidean 3-space. Integrated curves carry
derivative callbacks built from the integrated frame and the prescribed
curvature functions, so downstream Frenet analysis does not differentiate
interpolated positions.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

from ._numerics import callable_derivative
from ._symbolic import parse, scalar_function
from .curvegeo import CurveSamples, curve_from_expressions
from .manifold import ChartMetric, builtin_metric

log = logging.getLogger(__name__)

CURVE_NAMES = ("log_spiral", "cone_loxodrome", "circle_origin", "hyperbolic_vertical_line", "rectifying")
RTOL = 1e-9
ATOL = 1e-12
SLANT_VERIFY_TOL = 1e-4

ScalarSpec = Union[str, float, Callable]


class SynthesisError(ValueError):
    pass


class DegenerateCurveError(SynthesisError):
    """The requested data force a straight line (vanishing curvature)."""


def builtin_curve(name: str, params: Sequence[float] = (), s_range=None, n: int = 201) -> CurveSamples:
    """Closed-form unit-speed example curves with exact derivatives."""
    params = [float(p) for p in params]
    punctured = builtin_metric("punctured_euclidean", 3)
    if name == "log_spiral":
        lo, hi = s_range or (1.0, 10.0)
        if lo <= 0:
            raise SynthesisError("log_spiral needs s > 0")
        exprs = ["s/sqrt(2)*cos(log(s))", "0", "s/sqrt(2)*sin(log(s))"]
        return curve_from_expressions(exprs, (lo, hi), punctured, n, "s", 4, (0.0, np.inf), True, name)
    if name == "cone_loxodrome":
        lo, hi = s_range or (1.0, 10.0)
        if lo <= 0:
            raise SynthesisError("cone_loxodrome needs s > 0")
        m = "2*sqrt(3)*log(s/4)"
        exprs = [f"s/4*cos({m})", "sqrt(3)*s/4", f"s/4*sin({m})"]
        return curve_from_expressions(exprs, (lo, hi), punctured, n, "s", 4, (0.0, np.inf), True, name)
    if name == "circle_origin":
        r = params[0] if params else 1.0
        if r <= 0:
            raise SynthesisError("circle radius must be positive")
        lo, hi = s_range or (0.0, 2 * np.pi * r)
        exprs = [f"{r!r}*cos(s/{r!r})", f"{r!r}*sin(s/{r!r})", "0"]
        return curve_from_expressions(exprs, (lo, hi), punctured, n, "s", 4, (-np.inf, np.inf), True, name)
    if name == "hyperbolic_vertical_line":
        x1, x2 = (params + [0.0, 0.0])[:2]
        lo, hi = s_range or (0.0, 1.0)
        exprs = [repr(x1), repr(x2), "exp(s)"]
        metric = builtin_metric("hyperbolic_upper_half", 3)
        return curve_from_expressions(exprs, (lo, hi), metric, n, "s", 4, (-np.inf, np.inf), True, name)
    if name == "rectifying":
        # position (s + b) T + a B: sqrt(a^2 + (s+b)^2) times a unit-speed small circle on the sphere
        a, b, alpha = (params + [1.0, 2.0, float(np.pi / 4)][len(params):])[:3]
        if a <= 0 or not 0 < alpha < np.pi / 2:
            raise SynthesisError("rectifying needs a > 0 and 0 < alpha < pi/2")
        lo, hi = s_range or (0.0, 2.0)
        sa, ca = float(np.sin(alpha)), float(np.cos(alpha))
        t = f"atan((s + {b!r})/{a!r})"
        rad = f"sqrt({a!r}**2 + (s + {b!r})**2)"
        exprs = [f"{rad}*{sa!r}*cos({t}/{sa!r})", f"{rad}*{sa!r}*sin({t}/{sa!r})", f"{rad}*{ca!r}"]
        curve = curve_from_expressions(exprs, (lo, hi), punctured, n, "s", 4, (-np.inf, np.inf), True, name)
        curve.meta.update(a=a, b=b, alpha=alpha)
        return curve
    raise SynthesisError(f"unknown curve {name!r}; choose from {', '.join(CURVE_NAMES)}")


def _scalar(spec: ScalarSpec, order: int = 1) -> list[Callable]:
    if callable(spec):
        f = spec
        fns = [lambda s, f=f: np.asarray(f(np.asarray(s, dtype=float)), dtype=float) * np.ones_like(s, dtype=float)]
        for k in range(1, order + 1):
            fns.append(lambda s, k=k, f=fns[0]: callable_derivative(f, np.atleast_1d(s), k, h=1e-3))
        return fns
    return scalar_function(spec, "s", order)


def _canonical(initial_point, initial_frame) -> tuple[np.ndarray, np.ndarray]:
    x0 = np.zeros(3) if initial_point is None else np.asarray(initial_point, dtype=float)
    f0 = np.eye(3) if initial_frame is None else np.asarray(initial_frame, dtype=float)
    if f0.shape != (3, 3) or not np.allclose(f0 @ f0.T, np.eye(3), atol=1e-10):
        raise SynthesisError("initial frame must be orthonormal (rows T, N, B)")
    if np.linalg.det(f0) <= 0:
        raise SynthesisError("initial frame must be positively oriented")
    return x0, f0


def _orthonormalize(t, n, b):
    stack = np.stack([t, n, b], axis=-1)
    q, r = np.linalg.qr(stack)
    sign = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    q = q * sign[..., None, :]
    return q[..., 0], q[..., 1], q[..., 2]


def _integrate(kappa, tau, kappa_prime, s_range, x0, f0, aux0=(), aux_rhs=None, events=None,
               n=201, rtol=RTOL, atol=ATOL, metric: Optional[ChartMetric] = None, name="") -> CurveSamples:
    """Integrate x' = T, T' = kN, N' = -kT + tB, B' = -tN (plus auxiliary states).

    ``kappa``, ``tau`` and ``kappa_prime`` take (s, aux) with aux shaped (n_aux, ...).
    """
    s0, s1 = map(float, s_range)
    aux0 = np.atleast_1d(np.asarray(aux0, dtype=float))
    n_aux = aux0.size

    def rhs(s, y):
        t_, n_, b_ = y[3:6], y[6:9], y[9:12]
        aux = y[12:]
        k = kappa(s, aux)
        w = tau(s, aux)
        out = np.concatenate([t_, k * n_, -k * t_ + w * b_, -w * n_])
        if n_aux:
            out = np.concatenate([out, np.atleast_1d(aux_rhs(s, aux))])
        return out

    y0 = np.concatenate([x0, f0[0], f0[1], f0[2], aux0])
    sol = solve_ivp(rhs, (s0, s1), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True, events=events)
    if sol.status == 1:
        where = float(sol.t_events[0][0]) if events is not None and len(sol.t_events[0]) else float(sol.t[-1])
        raise SynthesisError(f"integration stopped by an event at s={where:.6g}")
    if not sol.success:
        raise SynthesisError(f"integrator failed: {sol.message}")
    dense = sol.sol

    def state(s):
        y = np.atleast_2d(dense(np.atleast_1d(s)).T)
        t_, n_, b_ = _orthonormalize(y[:, 3:6], y[:, 6:9], y[:, 9:12])
        return y[:, :3], t_, n_, b_, y[:, 12:].T

    def analytic(s, k):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        x, t_, n_, b_, aux = state(s)
        if k == 0:
            return x
        if k == 1:
            return t_
        kap = np.broadcast_to(kappa(s, aux), s.shape)[:, None]
        if k == 2:
            return kap * n_
        if k == 3:
            w = np.broadcast_to(tau(s, aux), s.shape)[:, None]
            dk = np.broadcast_to(kappa_prime(s, aux), s.shape)[:, None]
            return -kap**2 * t_ + dk * n_ + kap * w * b_
        raise ValueError("integrated curves provide derivatives up to order 3")

    grid = np.linspace(s0, s1, n)
    _, _, _, _, aux = state(grid)
    kap = np.broadcast_to(kappa(grid, aux), grid.shape)
    if np.any(kap <= 0.0):
        i = int(np.flatnonzero(kap <= 0.0)[0])
        raise SynthesisError(f"curvature is not positive at s={grid[i]:.6g} (kappa={kap[i]:.3g})")
    metric = metric or builtin_metric("euclidean", 3)
    curve = CurveSamples(metric, grid, analytic(grid, 0), analytic, 3, True, (s0, s1), name)
    curve.meta["state"] = state
    return curve


def frenet_integrate(
    kappa: ScalarSpec,
    tau: ScalarSpec,
    s_range=(0.0, 1.0),
    initial_point=None,
    initial_frame=None,
    n: int = 201,
    rtol: float = RTOL,
    atol: float = ATOL,
    metric: Optional[ChartMetric] = None,
) -> CurveSamples:
    """Space curve with prescribed curvature and torsion (functions or expressions in s)."""
    kfns = _scalar(kappa, 1)
    tfn = _scalar(tau, 0)[0]
    x0, f0 = _canonical(initial_point, initial_frame)
    probe = np.linspace(s_range[0], s_range[1], 401)
    if np.any(kfns[0](probe) <= 0.0):
        raise SynthesisError("curvature must be positive on the whole range")
    return _integrate(
        lambda s, aux: kfns[0](s),
        lambda s, aux: tfn(s),
        lambda s, aux: kfns[1](s),
        s_range, x0, f0, n=n, rtol=rtol, atol=atol, metric=metric, name="frenet_integrate",
    )


@dataclass
class SynthesisConfig:
    theta: float
    phi: Optional[str] = None  # distance function for slant synthesis
    s_range: tuple[float, float] = (1.0, 3.0)
    tau0: Optional[float] = None
    n: int = 201
    rtol: float = 1e-10
    atol: float = 1e-12


def _slant_symbols(phi_expr, cos_t):
    s = sp.Symbol("s", real=True)
    tau = sp.Symbol("tau", real=True)
    phi = parse(phi_expr, "s").subs(sp.Symbol("s"), s)
    dphi = sp.diff(phi, s)
    if sp.simplify(dphi) == 0:
        raise SynthesisError("constant phi: only the circle about the origin (cos theta = -1) qualifies")
    pp = phi * dphi
    dpp = sp.diff(pp, s)
    kappa = (dpp - 1) / (cos_t * phi)
    big_f = (cos_t**2 + dpp - 1) * dphi
    tau_rhs = tau / big_f * (sp.diff(big_f, s) + cos_t**2 * phi * tau**2)
    budget = phi**2 - pp**2 - cos_t**2 * phi**2
    names = dict(phi=phi, dphi=dphi, pp=pp, kappa=kappa, dkappa=sp.diff(kappa, s), F=big_f, budget=budget)
    fns = {k: sp.lambdify(s, v, "numpy") for k, v in names.items()}
    fns["tau_rhs"] = sp.lambdify((s, tau), tau_rhs, "numpy")
    return {k: (lambda f: lambda *a: np.broadcast_to(np.asarray(f(*a), dtype=float),
                                                     np.broadcast(*[np.asarray(x) for x in a]).shape).copy())(f)
            for k, f in fns.items()}


def synthesize_slant_from_phi(config: SynthesisConfig) -> CurveSamples:
    """Curve around the origin whose principal normal meets the radial field at angle theta.

    Curvature comes from the distance function phi; torsion solves its first-order
    ODE. Without an explicit ``tau0`` the initial torsion is the unique value that
    keeps the position decomposition consistent at s0.
    """
    if config.phi is None:
        raise SynthesisError("slant synthesis needs a distance function phi")
    c = float(np.cos(config.theta))
    if abs(c) < 1e-12:
        raise SynthesisError("cos(theta) = 0 is the rectifying case; it is not synthesized here")
    f = _slant_symbols(config.phi, c)
    s0, s1 = map(float, config.s_range)
    probe = np.linspace(s0, s1, 2001)
    phi = f["phi"](probe)
    if np.any(~(phi > 0.0)):
        raise SynthesisError("phi must be positive on the range")
    if np.max(np.abs(f["dphi"](probe))) < 1e-12:
        raise SynthesisError("constant phi: only the circle about the origin (cos theta = -1) qualifies")
    budget = f["budget"](probe)
    if np.any(budget < -1e-12):
        i = int(np.flatnonzero(budget < -1e-12)[0])
        raise SynthesisError(f"infeasible: phi^2 - (phi phi')^2 - cos^2(theta) phi^2 < 0 at s={probe[i]:.6g}")
    kap = f["kappa"](probe)
    if np.any(kap <= 0.0):
        i = int(np.flatnonzero(kap <= 0.0)[0])
        raise SynthesisError(f"curvature from phi is not positive at s={probe[i]:.6g} (kappa={kap[i]:.3g})")

    g0 = float(np.sqrt(max(budget[0], 0.0)))
    big_f = f["F"](probe)
    if config.tau0 is None:
        tau0 = float(big_f[0] / (c * g0)) if g0 > 0.0 and abs(big_f[0]) > 1e-12 else 0.0
    else:
        tau0 = float(config.tau0)
    if tau0 != 0.0:
        bad = np.abs(big_f) < 1e-12
        flips = np.flatnonzero(np.diff(np.sign(big_f)) != 0)
        if bad.any() or flips.size:
            where = probe[bad] if bad.any() else probe[flips]
            raise SynthesisError(f"F(s) vanishes on the range (singular torsion ODE) near s={where.tolist()[:5]}")
        aux_rhs = lambda s, aux: f["tau_rhs"](s, aux[0])
    else:
        aux_rhs = lambda s, aux: 0.0 * aux

    x0 = np.array([f["pp"](np.array([s0]))[0], c * phi[0], g0])
    curve = _integrate(
        lambda s, aux: f["kappa"](s),
        lambda s, aux: aux[0],
        lambda s, aux: f["dkappa"](s),
        (s0, s1), x0, np.eye(3), aux0=[tau0], aux_rhs=aux_rhs,
        n=config.n, rtol=config.rtol, atol=config.atol,
        metric=builtin_metric("punctured_euclidean", 3), name="slant_from_phi",
    )
    x, _, n_, _, aux = curve.meta["state"](curve.grid)
    r = np.linalg.norm(x, axis=1)
    angle_dev = float(np.max(np.abs(np.einsum("ni,ni->n", x, n_) / r - c)))
    dist_dev = float(np.max(np.abs(r - f["phi"](curve.grid))))
    passed = angle_dev < SLANT_VERIFY_TOL and dist_dev < SLANT_VERIFY_TOL
    curve.meta.update(theta=config.theta, tau0=tau0, g0=g0, phi=str(config.phi), tau=aux[0],
                      post_verification={"max_angle_deviation": angle_dev, "max_distance_deviation": dist_dev,
                                         "tol": SLANT_VERIFY_TOL, "passed": passed})
    if not passed:
        warnings.warn(f"slant post-verification failed: max |<x,N>/|x| - cos theta| = {angle_dev:.2e}", stacklevel=2)
    return curve


def synthesize_concircular(
    f3: ScalarSpec,
    theta: float,
    rho: float,
    f1_0: float,
    s_range=(0.0, 1.0),
    initial_point=None,
    initial_frame=None,
    n: int = 401,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> CurveSamples:
    """Curve along which the concircular field rho x + v meets the principal normal in theta.

    Torsion is -f3'/theta, f1 solves f1' = theta tau f3 / f1 + rho and the
    curvature is tau f3 / f1. The constant v is fixed at s0 so that the field
    decomposes as f1 T + theta N + f3 B.
    """
    if abs(theta) < 1e-12:
        raise SynthesisError("theta must be nonzero (torsion is -f3'/theta)")
    if f1_0 == 0.0:
        raise SynthesisError("f1 must be nonzero")
    s = sp.Symbol("s", real=True)
    F1 = sp.Symbol("F1", real=True)
    if callable(f3):
        raise SynthesisError("f3 must be an expression in s")
    f3e = parse(f3, "s").subs(sp.Symbol("s"), s)
    tau_e = -sp.diff(f3e, s) / theta
    rhs_e = theta * tau_e * f3e / F1 + rho
    kap_e = tau_e * f3e / F1
    dkap_e = sp.diff(kap_e, s) + sp.diff(kap_e, F1) * rhs_e

    def lam(expr, args=(s,)):
        fn = sp.lambdify(args, expr, "numpy")
        return lambda *a: np.broadcast_to(np.asarray(fn(*a), dtype=float),
                                          np.broadcast(*[np.asarray(x) for x in a]).shape).copy()

    f3f, tauf = lam(f3e), lam(tau_e)
    rhsf, kapf, dkapf = lam(rhs_e, (s, F1)), lam(kap_e, (s, F1)), lam(dkap_e, (s, F1))
    s0, s1 = map(float, s_range)
    probe = np.linspace(s0, s1, 2001)
    if np.max(np.abs(tauf(probe))) < 1e-14:
        raise DegenerateCurveError("constant f3 gives zero torsion and hence zero curvature: a straight line")
    if np.any(f3f(probe) == 0.0) or np.any(np.diff(np.sign(f3f(probe))) != 0):
        raise SynthesisError("f3 must not vanish on the range")
    if kapf(s0, f1_0) <= 0.0:
        raise SynthesisError(f"initial curvature {kapf(s0, f1_0):.3g} is not positive")

    # f1 -> 0 is a square-root singularity, so stop just before it
    f1_floor = 1e-6 * abs(f1_0)

    def f1_zero(s_, y):
        return abs(y[12]) - f1_floor

    f1_zero.terminal = True
    x0, fr0 = _canonical(initial_point, initial_frame)
    try:
        curve = _integrate(
            lambda s_, aux: kapf(s_, aux[0]), lambda s_, aux: tauf(s_), lambda s_, aux: dkapf(s_, aux[0]),
            (s0, s1), x0, fr0, aux0=[f1_0], aux_rhs=lambda s_, aux: rhsf(s_, aux[0]), events=f1_zero,
            n=n, rtol=rtol, atol=atol, name="concircular",
        )
    except SynthesisError as exc:
        if "event" in str(exc):
            raise SynthesisError(f"f1 crosses zero: {exc}") from exc
        raise
    v = f1_0 * fr0[0] + theta * fr0[1] + float(f3f(s0)) * fr0[2] - rho * x0
    x, _, n_, _, aux = curve.meta["state"](curve.grid)
    field_vals = rho * x + v
    dev = float(np.max(np.abs(np.einsum("ni,ni->n", field_vals, n_) - theta)))
    curve.meta.update(theta=theta, rho=rho, field_params=[rho, *v.tolist()], f1=aux[0], f3=f3f(curve.grid),
                      post_verification={"max_theta_deviation": dev, "tol": 1e-6, "passed": dev < 1e-6})
    return curve
