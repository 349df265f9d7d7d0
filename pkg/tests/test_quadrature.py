import math

import numpy as np
import pytest

from abreu.quadrature import (circle_rule, composite_rule, disc_rule, edge_rule, fan_rule, gauss_legendre,
                              graded_breaks, polygon_rule)


@pytest.mark.parametrize("order", [1, 3, 7])
def test_gauss_legendre_exactness(order):
    x, w = gauss_legendre(order, 0.0, 2.0)
    for k in range(2 * order):
        assert np.dot(w, x ** k) == pytest.approx(2.0 ** (k + 1) / (k + 1), rel=1e-13)


def test_graded_breaks_geometric():
    b = graded_breaks(5, toward_start=True, toward_end=False)
    assert b[0] == 0.0 and b[-1] == 1.0
    assert np.all(np.diff(b) > 0)


def test_composite_rule_log_singularity():
    x, w = composite_rule(graded_breaks(14, toward_start=True, toward_end=False), 7)
    assert np.dot(w, np.log(x)) == pytest.approx(-1.0, abs=1e-6)


def test_fan_rule_moments(square, pentagon):
    for poly in (square, pentagon):
        pts, w = fan_rule(poly)
        assert w.sum() == pytest.approx(poly.area, rel=1e-13)
        np.testing.assert_allclose(pts.T @ w / w.sum(), poly.centroid, atol=1e-13)
        assert np.all(poly.distance(pts) > 0)


def test_fan_rule_log_distance(square):
    # int over the square of log x is -1
    pts, w = fan_rule(square, levels=14)
    assert np.dot(np.log(pts[:, 0]), w) == pytest.approx(-1.0, abs=1e-5)


def test_edge_rule_measure(pentagon):
    pts, w, idx = edge_rule(pentagon)
    assert w.sum() == pytest.approx(float(np.sum(pentagon.sigma * pentagon.edge_lengths)), rel=1e-13)
    np.testing.assert_allclose(pentagon.signed_distances(pts)[np.arange(len(pts)), idx], 0.0, atol=1e-14)


def test_boundary_integral_of_square_gold(square_gold, square):
    pts, w, _ = edge_rule(square)
    assert np.dot(square_gold.value(pts), w) == pytest.approx(8 * math.log(2) - 2, abs=1e-10)


def test_disc_rule():
    pts, w, r, _ = disc_rule([0.3, 0.1], 0.2)
    assert w.sum() == pytest.approx(math.pi * 0.04, rel=1e-13)
    assert np.dot(1 / r, w) == pytest.approx(2 * math.pi * 0.2, rel=1e-12)
    assert np.dot(pts[:, 0], w) == pytest.approx(0.3 * math.pi * 0.04, rel=1e-12)


def test_circle_rule():
    pts, w, _ = circle_rule([1.0, 2.0], 0.5, 64)
    assert w.sum() == pytest.approx(math.pi, rel=1e-14)
    assert np.dot(pts[:, 1] ** 2, w) == pytest.approx(math.pi * (4 + 0.125), rel=1e-13)


def test_polygon_rule_exact_for_polynomials():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pts, w = polygon_rule(tri, order=4)
    # int_simplex x^a y^b = a! b! / (a + b + 2)!
    for a, b in ((0, 0), (2, 1), (3, 3), (0, 6)):
        exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
        assert np.dot(pts[:, 0] ** a * pts[:, 1] ** b, w) == pytest.approx(exact, rel=1e-12)
