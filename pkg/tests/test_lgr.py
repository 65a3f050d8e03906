"""Radau collocation points, weights, and derivative operators."""

import numpy as np
import pytest

from tribody import lgr


def test_two_point_rule_closed_form():
    pts, wts = lgr.points_weights(2)
    np.testing.assert_allclose(pts, [-1.0, 1.0 / 3.0], atol=1e-15)
    np.testing.assert_allclose(wts, [0.5, 1.5], atol=1e-15)


@pytest.mark.parametrize("n", range(lgr.MIN_DEGREE, lgr.MAX_DEGREE + 1))
def test_point_layout(n):
    pts, wts = lgr.points_weights(n)
    assert pts[0] == -1.0
    assert (np.diff(pts) > 0).all()
    assert pts[-1] < 1.0
    assert (wts > 0).all()
    assert wts.sum() == pytest.approx(2.0, abs=1e-13)


@pytest.mark.parametrize("n", [2, 3, 5, 8, 12])
def test_quadrature_exact_to_degree_2n_minus_2(n):
    rng = np.random.default_rng(n)
    pts, wts = lgr.points_weights(n)
    coeffs = rng.uniform(-1, 1, size=2 * n - 1)  # degree 2n-2
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(1.0) - poly.integ()(-1.0)
    assert wts @ poly(pts) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_quadrature_not_exact_beyond():
    # degree 2n-1 monomial shows a real error for the 3-point rule
    n = 3
    pts, wts = lgr.points_weights(n)
    val = wts @ pts ** (2 * n - 1)
    exact = 0.0  # odd power over symmetric interval
    assert abs(val - exact) > 1e-6


@pytest.mark.parametrize("n", [2, 4, 7, 12])
def test_differentiation_exact_to_degree_n(n):
    rng = np.random.default_rng(50 + n)
    sup = lgr.support_points(n)
    pts, _ = lgr.points_weights(n)
    d = lgr.differentiation_matrix(n)
    assert d.shape == (n, n + 1)
    coeffs = rng.uniform(-1, 1, size=n + 1)  # degree n
    poly = np.polynomial.Polynomial(coeffs)
    np.testing.assert_allclose(d @ poly(sup), poly.deriv()(pts), rtol=1e-10, atol=1e-11)


def test_differentiation_kills_constants():
    for n in (2, 6, 11):
        d = lgr.differentiation_matrix(n)
        np.testing.assert_allclose(d.sum(axis=1), 0.0, atol=1e-11)


def test_support_points_append_right_end():
    for n in (2, 5):
        sup = lgr.support_points(n)
        pts, _ = lgr.points_weights(n)
        np.testing.assert_array_equal(sup[:-1], pts)
        assert sup[-1] == 1.0


def test_degree_bounds_exported():
    assert lgr.MIN_DEGREE == 2
    assert lgr.MAX_DEGREE == 12


def test_barycentric_interpolation_reproduces_nodes_and_polys():
    nodes = lgr.support_points(5)
    rng = np.random.default_rng(3)
    coeffs = rng.uniform(-1, 1, size=6)
    poly = np.polynomial.Polynomial(coeffs)
    vals = poly(nodes)
    # exact at nodes (bitwise) and exact for the degree-5 polynomial between
    out = lgr.barycentric_interpolate(nodes, vals, nodes)
    np.testing.assert_array_equal(out, vals)
    xs = np.linspace(-1, 1, 40)
    np.testing.assert_allclose(
        lgr.barycentric_interpolate(nodes, vals, xs), poly(xs), rtol=1e-11, atol=1e-12
    )
    # 2-D values: interpolate both columns at once
    vals2 = np.column_stack([vals, 2 * vals])
    out2 = lgr.barycentric_interpolate(nodes, vals2, xs)
    np.testing.assert_allclose(out2[:, 1], 2 * poly(xs), rtol=1e-11, atol=1e-12)


def test_returned_arrays_are_copies():
    p1, w1 = lgr.points_weights(4)
    p1[0] = 99.0
    p2, _ = lgr.points_weights(4)
    assert p2[0] == -1.0
