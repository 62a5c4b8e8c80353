import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from slanthelix.curvegeo import curve_from_expressions
from slanthelix.manifold import (
    ChartMetric,
    DomainError,
    MetricError,
    builtin_metric,
    christoffel,
    christoffel_batch,
    covariant_derivative_along,
    inner,
)


def sympy_christoffel(g, coords):
    m = len(coords)
    ginv = g.inv()
    return [[[sp.simplify(sum(ginv[k, l] * (sp.diff(g[j, l], coords[i]) + sp.diff(g[i, l], coords[j])
                                            - sp.diff(g[i, j], coords[l])) for l in range(m)) / 2)
              for j in range(m)] for i in range(m)] for k in range(m)]


def oracle(g, coords, point):
    table = sympy_christoffel(g, coords)
    sub = dict(zip(coords, point))
    return np.array([[[float(table[k][i][j].subs(sub)) for j in range(3)] for i in range(3)] for k in range(3)])


X = sp.symbols("x1 x2 x3", real=True)
HYP = sp.diag(*[1 / X[2] ** 2] * 3)
A, B = 1.5, 0.7
WARPED = sp.diag(1, (A * sp.exp(B * X[0])) ** 2, (A * sp.exp(B * X[0])) ** 2)


def test_euclidean_identity_and_flat_christoffel():
    m = builtin_metric("euclidean", 3)
    assert np.allclose(m.g([0.3, -2.0, 5.0])[0], np.eye(3))
    assert np.all(christoffel(m, [1.0, 2.0, 3.0]) == 0.0)


def test_punctured_origin_is_outside_domain():
    m = builtin_metric("punctured_euclidean", 3)
    assert not m.domain(np.zeros((1, 3)))[0]
    with pytest.raises(DomainError):
        m.g([0.0, 0.0, 0.0])


def test_inner_products():
    m = builtin_metric("euclidean", 3)
    assert inner(m, [0, 0, 0], [1, 0, 0], [0, 1, 0]) == 0.0
    assert inner(m, [0, 0, 0], [3, 4, 0], [3, 4, 0]) == 25.0
    with pytest.raises(ValueError):
        inner(m, np.zeros((2, 3)), np.ones((3, 3)), np.ones((3, 3)))


@pytest.mark.parametrize("point", [(0.3, -1.2, 0.5), (2.0, 0.1, 3.0), (-1.0, 4.0, 0.05)])
def test_hyperbolic_christoffel_matches_sympy(point):
    m = builtin_metric("hyperbolic_upper_half", 3)
    assert np.allclose(christoffel(m, point), oracle(HYP, X, point), atol=1e-12, rtol=1e-12)


@pytest.mark.parametrize("point", [(0.3, -1.2, 0.5), (-0.8, 0.1, 3.0)])
def test_warped_christoffel_matches_sympy(point):
    m = builtin_metric("warped_interval_product", 3, [A, B, -1.0, 1.0])
    assert np.allclose(christoffel(m, point), oracle(WARPED, X, point), atol=1e-12, rtol=1e-12)


def test_finite_difference_fallback_matches_analytic():
    hyp = builtin_metric("hyperbolic_upper_half", 3)
    fd = ChartMetric(3, hyp.components, hyp.domain, "hyperbolic_fd")
    pts = np.array([[0.1, 0.2, 0.7], [1.0, -2.0, 2.5]])
    assert np.allclose(christoffel_batch(fd, pts), christoffel_batch(hyp, pts), atol=1e-7)


def test_finite_difference_stencil_respects_domain():
    hyp = builtin_metric("hyperbolic_upper_half", 3)
    fd = ChartMetric(3, hyp.components, hyp.domain, "hyperbolic_fd")
    with pytest.raises(DomainError):
        christoffel_batch(fd, [[0.0, 0.0, 1e-7]])


def test_warped_parameters_validated():
    with pytest.raises(MetricError):
        builtin_metric("warped_interval_product", 3, [-1.0, 1.0])
    with pytest.raises(MetricError):
        builtin_metric("warped_interval_product", 3, [1.0, 1.0, 1.0, 0.0])
    with pytest.raises(MetricError):
        builtin_metric("sphere", 3)
    with pytest.raises(MetricError):
        builtin_metric("euclidean", 1)


def test_singular_metric_detected():
    m = ChartMetric(2, lambda p: np.zeros((len(p), 2, 2)), lambda p: np.ones(len(p), bool), "degenerate")
    with pytest.raises(MetricError):
        christoffel_batch(m, [[0.0, 0.0]])


def test_covariant_derivative_of_circle_tangent():
    m = builtin_metric("euclidean", 3)
    c = curve_from_expressions(["cos(s)", "sin(s)", "0"], (0, 2 * np.pi), m, 101, "s", arclength=True)
    tangent = lambda s: c.derivative(1, s)
    for s in (0.3, 1.7):
        acc = covariant_derivative_along(m, c, tangent, s)
        assert np.allclose(acc, [-np.cos(s), -np.sin(s), 0.0], atol=1e-8)


def test_covariant_derivative_of_constant_field_is_zero():
    m = builtin_metric("euclidean", 3)
    c = curve_from_expressions(["s", "2*s", "0"], (0, 1), m, 41, "s")
    w = np.tile([1.0, -1.0, 2.0], (41, 1))
    assert np.allclose(covariant_derivative_along(m, c, w, c.grid[10]), 0.0)
    with pytest.raises(ValueError):
        covariant_derivative_along(m, c, w, c.grid[0])
    assert np.allclose(covariant_derivative_along(m, c, w, c.grid[0], one_sided=True), 0.0)
    with pytest.raises(ValueError):
        covariant_derivative_along(m, c, w, 0.123456)


def test_parallel_transport_in_hyperbolic_along_vertical_line():
    # along x(s) = (0, 0, e^s) the field e^s e_1 is parallel: d/ds + Gamma(c', W) = 0
    m = builtin_metric("hyperbolic_upper_half", 3)
    c = curve_from_expressions(["0", "0", "exp(s)"], (0, 1), m, 21, "s")
    w = lambda s: np.stack([np.exp(s), 0 * s, 0 * s], axis=1)
    dw = lambda s: np.stack([np.exp(s), 0 * s, 0 * s], axis=1)
    assert np.allclose(covariant_derivative_along(m, c, w, 0.4, dw), 0.0, atol=1e-12)


coords = st.floats(-3, 3, allow_nan=False)


@given(coords, coords, st.floats(0.05, 4))
def test_christoffel_symmetric_and_metric_compatible(a, b, c):
    m = builtin_metric("hyperbolic_upper_half", 3)
    p = np.array([[a, b, c]])
    gam = christoffel_batch(m, p)[0]
    assert np.allclose(gam, np.transpose(gam, (0, 2, 1)))
    # d_l g_ij = g_kj Gamma^k_li + g_ik Gamma^k_lj
    g = m.g(p)[0]
    dg = m.dg(p)[0]
    rebuilt = np.einsum("kj,kli->lij", g, gam) + np.einsum("ik,klj->lij", g, gam)
    assert np.allclose(dg, rebuilt, rtol=1e-10, atol=1e-10 * np.abs(dg).max())
