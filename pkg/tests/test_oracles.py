"""Closed-form values for the gold potentials, one check per oracle."""

import math

import numpy as np
import pytest

from abreu.calculus import curvature_tensors, guillemin_metric, hessian_package, vector_fields
from abreu.conjugate import Conjugate, boundary_compare, hamiltonian, l_transfer_check, three_point_K, v_bound_check
from abreu.estimates import barrier_lower_bound, chi_invariant, pogorelov_check, section_upper_bound
from abreu.polytope import boundary_b, boundary_distance, defining_functions, measures_and_A
from abreu.potential import QuadraticPotential, RescaledPotential, convexity_audit, interior_grid
from abreu.sections import h_distance, k2_window, normalize_section, section_boundary, section_stats
from abreu.stability import CreasedPL, affine_kernel_check, linfunc

from conftest import interior_points


# -- polygon data ---------------------------------------------------------------------


def test_simplex_hypotenuse_function(simplex):
    hyp = defining_functions(simplex)[1]
    for p in ([0.2, 0.3], [0.1, 0.1]):
        assert hyp(np.array(p)) == pytest.approx(1 - p[0] - p[1], abs=1e-15)
    assert np.linalg.norm(hyp.gradient) == pytest.approx(math.sqrt(2), rel=1e-15)


def test_simplex_distance_and_measures(simplex):
    # the hypotenuse is at (1 - 0.5)/sqrt 2, but the legs are closer
    assert simplex.signed_distances(np.array([0.25, 0.25]))[1] == pytest.approx(0.5 / math.sqrt(2), rel=1e-15)
    assert boundary_distance(simplex, [0.25, 0.25]) == 0.25
    assert measures_and_A(simplex) == pytest.approx((0.5, 3.0, 6.0), rel=1e-15)


def test_boundary_distance_is_lipschitz(pentagon):
    x, y = interior_points(pentagon, 200, seed=1), interior_points(pentagon, 200, seed=2)
    dx = np.array([boundary_distance(pentagon, p) for p in x])
    dy = np.array([boundary_distance(pentagon, p) for p in y])
    assert np.all(np.abs(dx - dy) <= np.linalg.norm(x - y, axis=1) + 1e-14)


def test_simplex_kernel_is_exact(simplex):
    np.testing.assert_allclose(affine_kernel_check(simplex, 6.0).residuals, 0.0, atol=1e-15)


# -- potentials -------------------------------------------------------------------------


def test_square_gold_jets(square_gold):
    j = square_gold.jet(np.array([[0.5, 0.5], [0.25, 0.5]]))
    assert j.value[0] == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(j.grad[0], 0.0, atol=1e-15)
    np.testing.assert_allclose(j.hess[0], np.diag([4.0, 4.0]), rtol=1e-14)
    np.testing.assert_allclose(j.grad[1], [math.log(1 / 3), 0.0], atol=1e-14)
    np.testing.assert_allclose(j.hess[1], np.diag([16 / 3, 4.0]), rtol=1e-14)
    np.testing.assert_allclose(square_gold.affine_shift, [2 * math.log(2), 0, 0], atol=1e-15)


def test_simplex_gold_closed_form(simplex_gold, simplex):
    p = interior_points(simplex, 20, seed=3)
    x, y = p[:, 0], p[:, 1]
    z = 1 - x - y
    u0 = x * np.log(x) + y * np.log(y) + z * np.log(z)
    b = simplex.base_point
    ub = sum(s * math.log(s) for s in (b[0], b[1], 1 - b[0] - b[1]))
    g = np.log(b / (1 - b.sum()))
    np.testing.assert_allclose(simplex_gold.value(p), u0 - ub - (p - b) @ g, atol=1e-13)


def test_square_min_eigenvalue_is_at_centre(square_gold):
    rep = convexity_audit(square_gold, n=41)
    assert rep.min_eigenvalue == pytest.approx(4.0, rel=1e-12)
    # the smaller eigenvalue is 4 along the whole cross x = 1/2 or y = 1/2
    assert min(abs(rep.argmin - 0.5)) < 1e-12
    assert convexity_audit(square_gold.replace(coefficients=0 * square_gold.coefficients)).convex


def test_simplex_canonical_is_convex(simplex_gold):
    assert convexity_audit(simplex_gold).min_eigenvalue > 0


# -- calculus -------------------------------------------------------------------------------


def test_square_point_state(square_gold):
    st = hessian_package(square_gold.jet(np.array([[0.25, 0.5]])))
    assert st.det_hess[0] == pytest.approx(64 / 3, rel=1e-14)
    assert st.L[0] == pytest.approx(math.log(64 / 3), rel=1e-14)
    np.testing.assert_allclose(st.v[0], [-0.5, 0.0], atol=1e-14)


def test_square_w_from_corner(square_gold, square):
    st = hessian_package(square_gold.jet(interior_points(square, 30, seed=4)))
    np.testing.assert_allclose(vector_fields(st, 4.0, [0.0, 0.0]).w, -1.0, atol=1e-13)


def test_square_F_components(square_gold):
    pack = curvature_tensors(hessian_package(square_gold.jet(np.array([[0.3, 0.8]]))))
    F = pack.F_mixed
    assert F[0, 0, 0, 0, 0] == pytest.approx(2.0, rel=1e-12)
    assert F[0, 1, 1, 1, 1] == pytest.approx(2.0, rel=1e-12)
    mask = np.ones_like(F[0], dtype=bool)
    mask[0, 0, 0, 0] = mask[1, 1, 1, 1] = False
    np.testing.assert_allclose(F[0][mask], 0.0, atol=1e-12)


def test_guillemin_metric_at_centre(square_gold):
    g = guillemin_metric(hessian_package(square_gold.jet(np.array([[0.5, 0.5]]))))[0]
    np.testing.assert_allclose(g, np.diag([4.0, 4.0, 0.25, 0.25]), atol=1e-15)


# -- stability ----------------------------------------------------------------------------------


def test_axis_crease_ratios_closed_form(square):
    # f = max(0, x - s): boundary (1 - s) + (1 - s)^2, L = (1 - s) - (1 - s)^2
    for s in np.linspace(0.55, 0.95, 9):
        val = linfunc(square, 4.0, CreasedPL([1.0, 0.0], -s))
        e = 1 - s
        assert val.boundary / val.value == pytest.approx((1 + e) / (1 - e), rel=1e-13)


def test_crease_tail_tends_to_one(square):
    ratios = [(lambda v: v.boundary / v.value)(linfunc(square, 4.0, CreasedPL([1.0, 0.0], -(1 - e))))
              for e in (0.4, 0.1, 0.01, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1.0, abs=1e-3)


# -- conjugate function on the simplex --------------------------------------------------------------


def test_simplex_conjugate(simplex_gold, simplex):
    field = hamiltonian(simplex_gold, 6.0, grid=9, origin=[0.0, 0.0], rectangles=20)
    assert field.QH_residual < 1e-5
    b = boundary_b(simplex, 6.0, origin=[0.0, 0.0])
    assert boundary_compare(Conjugate(simplex_gold, 6.0, [0.0, 0.0]), b).deviation < 1e-3
    K = three_point_K(simplex, b)
    # the only triple is the simplex itself: the plane through (0,0,0), (1,0,1), (0,1,-1)
    assert K == pytest.approx(math.sqrt(2), rel=1e-14)
    rep = v_bound_check(simplex_gold, 6.0, K, interior_points(simplex, 300, seed=5), origin=[0.0, 0.0])
    assert rep.sup_w <= K + 1e-6


def test_square_transfer_example(square_gold):
    rep = l_transfer_check(square_gold, math.sqrt(2), [[0.5, 0.5]], [[0.25, 0.5]])
    assert rep.worst_margin == pytest.approx(math.sqrt(2) * math.log(3) - math.log(4 / 3), rel=1e-12)


def test_simplex_transfer_pairs(simplex_gold, simplex):
    x, y = interior_points(simplex, 100, seed=6), interior_points(simplex, 100, seed=7)
    pts = np.concatenate([x, y])
    K = float(np.max(np.linalg.norm(hessian_package(simplex_gold.jet(pts)).v, axis=1)))
    # the sup of |v| over the domain bounds the ratio; use the closed-domain bound
    K_v = three_point_K(simplex, boundary_b(simplex, 6.0)) + 3.0 * 1.01
    assert l_transfer_check(simplex_gold, max(K, K_v), x, y).passed


# -- sections ---------------------------------------------------------------------------------------


def test_h_distance_example(square_gold):
    expect = 2 * math.log(2) + 0.75 * math.log(0.75) + 0.25 * math.log(0.25) - math.log(2)
    assert h_distance(square_gold, [0.5, 0.5], [0.75, 0.5]) == pytest.approx(expect, rel=1e-13)
    assert expect == pytest.approx(0.1308, abs=1e-4)


def test_square_section_volume_against_dense_quadrature(square_gold, square):
    sec = section_boundary(square_gold, [0.5, 0.5], 0.1, nrays=512)
    assert sec.is_convex()
    n = 800
    g = interior_grid(square, n, 0.0)
    inside = h_distance(square_gold, [0.5, 0.5], g) <= 0.1
    assert sec.volume == pytest.approx(inside.sum() / n ** 2, rel=1e-2)
    st = section_stats(square_gold, [0.5, 0.5], [0.1])
    assert st.c1 * 0.1 <= sec.volume * (1 + 1e-3) and sec.volume <= st.c2 * 0.1 * (1 + 1e-3)


def test_elliptic_quadratic_normalization():
    q = QuadraticPotential(np.diag([4.0, 1.0]), [0.0, 0.0])
    nm = normalize_section(section_boundary(q, [0.0, 0.0], 1.0, nrays=512))
    sv = np.linalg.svd(nm.T, compute_uv=False)
    np.testing.assert_allclose(sv, [math.sqrt(2), 1 / math.sqrt(2)], rtol=1e-4)


def test_square_k2_window(square_gold):
    st = section_stats(square_gold, [0.5, 0.5], [0.05, 0.1, 0.2])
    lo, hi = k2_window(st.c1, st.c2)
    for k in st.k:
        assert lo <= k * k <= hi
    assert max(st.volume_ratios) <= 2 * min(st.volume_ratios)


def test_quasi_triangle_on_quadratic():
    q = QuadraticPotential(np.eye(2), [0.0, 0.0])
    st = section_stats(q, [0.0, 0.0], [0.5, 1.0])
    assert st.c4 <= 4 + 1e-12


def test_rescaled_curvature_at_t4(square_gold):
    res = RescaledPotential(square_gold, 4.0, np.eye(2), np.array([0.5, 0.5]))
    x = np.array([[0.05, -0.1]])
    s1 = hessian_package(res.jet(x))
    s0 = hessian_package(square_gold.jet(res.to_base(x)))
    assert curvature_tensors(s1).normF2[0] == pytest.approx(128.0, rel=1e-12)
    assert s1.det_hess[0] == pytest.approx(s0.det_hess[0], rel=1e-13)


# -- estimates ----------------------------------------------------------------------------------------


def test_barrier_at_square_centre(square_gold):
    det, barrier, _, _ = barrier_lower_bound(square_gold, 4.0, [[0.5, 0.5]])
    assert det[0] == pytest.approx(16.0, rel=1e-14)
    assert 0 < barrier[0] < det[0]


def test_upper_bound_quadratic_on_unit_disc():
    q = QuadraticPotential(np.eye(2), [0.0, 0.0])
    r = section_upper_bound(q, 0.0, [0.0, 0.0], 0.5)
    assert r["C"] == pytest.approx(1.01, rel=2e-3)
    assert r["a"] == 0 and r["passed"]


def test_square_upper_bound_and_pogorelov_margins(square_gold):
    assert section_upper_bound(square_gold, 4.0, [0.5, 0.5], 0.1)["margin"] > 0
    assert pogorelov_check(square_gold, 0.1)["margin"] > 0


def test_square_bump_chi(square_gold):
    bump = np.array([0, 0, 1, -2, 1], dtype=float)
    r = chi_invariant([square_gold.with_polynomial(0.05 * np.outer(bump, bump))])
    assert r["values"][0] == pytest.approx(-8.0, abs=1e-3)
