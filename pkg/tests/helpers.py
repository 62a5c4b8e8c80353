"""Curve generators shared by the property tests and the acceptance suite."""

import numpy as np
import sympy as sp

from slanthelix.curvegeo import curve_from_expressions, reparametrize_arclength
from slanthelix.manifold import builtin_metric

t = sp.Symbol("t", real=True)


def rotation(seed_vec):
    """Proper rotation from an axis-angle vector."""
    v = np.asarray(seed_vec, dtype=float)
    angle = float(np.linalg.norm(v))
    if angle == 0.0:
        return np.eye(3)
    k = v / angle
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def random_expressions(rng, chart="euclidean"):
    """Helix-like closed-form curve with a small random trigonometric perturbation."""
    radius = rng.uniform(1.0, 2.0)
    pitch = rng.uniform(0.3, 1.0)
    base = [radius * sp.cos(t), radius * sp.sin(t), pitch * t]
    if chart == "hyperbolic_upper_half":
        base = [radius * sp.cos(t), radius * sp.sin(t), 3 + pitch * t]
    eps = 0.05
    out = []
    for b in base:
        a1, a2, b1, b2 = rng.uniform(-eps, eps, 4)
        out.append(b + a1 * sp.sin(2 * t) + b1 * sp.cos(2 * t) + a2 * sp.sin(3 * t) + b2 * sp.cos(3 * t))
    return out


def curve_from_sympy(exprs, chart="euclidean", t_range=(0.0, 3.0), n=121):
    metric = builtin_metric(chart, 3)
    raw = curve_from_expressions([str(e) for e in exprs], t_range, metric, n=n, symbol="t", max_order=4)
    return reparametrize_arclength(raw, n)


def rotated(exprs, Q):
    exprs = [sp.sympify(e, locals={"t": t}) for e in exprs]
    return [sum(float(Q[i, j]) * exprs[j] for j in range(3)) for i in range(3)]
