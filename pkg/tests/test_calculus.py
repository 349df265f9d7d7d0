import numpy as np
import pytest

from abreu.calculus import (abreu_S_forms, curvature_tensors, epsilon, guillemin_metric, hessian_package,
                            lowered_F_direct, relative_deviation, variation_ZW, vector_fields)
from abreu.errors import ConvexityError
from abreu.potential import Jet4, SymplecticPotential

from conftest import interior_points, random_convex_jets


@pytest.fixture(scope="module")
def bumpy(pentagon):
    rng = np.random.default_rng(11)
    return SymplecticPotential(pentagon, 0.02 * rng.standard_normal((5, 5)))


def test_square_scalar_curvature_and_norms(square_gold, square):
    st = hessian_package(square_gold.jet(interior_points(square, 500, seed=5)))
    pack = curvature_tensors(st)
    np.testing.assert_allclose(st.S, 4.0, rtol=1e-12)
    np.testing.assert_allclose(pack.normF2, 8.0, rtol=1e-11)
    np.testing.assert_allclose(pack.normG2, 8.0, rtol=1e-11)
    np.testing.assert_allclose(pack.S, st.S, rtol=1e-12)


def test_simplex_scalar_curvature(simplex_gold, simplex):
    st = hessian_package(simplex_gold.jet(interior_points(simplex, 500, seed=6)))
    np.testing.assert_allclose(st.S, 6.0, rtol=1e-11)


@pytest.mark.parametrize("seed", range(4))
def test_forms_agree_on_random_jets(seed):
    st = hessian_package(random_convex_jets(25, seed))
    S1, S4, S5, _ = abreu_S_forms(st)
    assert np.max(relative_deviation(S1, S4, S5)) < 1e-8


def test_forms_agree_on_perturbed_potential(bumpy, pentagon):
    st = hessian_package(bumpy.jet(interior_points(pentagon, 300, seed=7)))
    assert np.max(relative_deviation(*abreu_S_forms(st)[:3])) < 1e-8


def test_not_convex_raises():
    jet = random_convex_jets(3, 0)
    hess = jet.hess.copy()
    hess[1] = -hess[1]
    bad = Jet4(jet.location, jet.value, jet.grad, hess, jet.third, jet.fourth)
    with pytest.raises(ConvexityError) as exc:
        hessian_package(bad)
    assert exc.value.location == pytest.approx(jet.location[1].tolist())


def _fd(fn, p, h):
    """Central differences of fn along both axes; result has a trailing axis."""
    e = np.eye(2) * h
    return np.stack([(fn(p + e[i]) - fn(p - e[i])) / (2 * h) for i in range(2)], axis=-1)


def test_inverse_hessian_derivatives(bumpy, pentagon):
    p = interior_points(pentagon, 8, seed=8, margin=0.15)
    st = hessian_package(bumpy.jet(p))
    inv = lambda q: hessian_package(bumpy.jet(q)).hess_inv
    d1_inv = lambda q: hessian_package(bumpy.jet(q)).hess_inv_d1
    fd1 = _fd(inv, p, 1e-5)
    fd2 = _fd(d1_inv, p, 1e-4)
    assert np.max(np.abs(fd1 - st.hess_inv_d1)) / np.max(np.abs(st.hess_inv_d1)) < 1e-5
    assert np.max(np.abs(fd2 - st.hess_inv_d2)) / np.max(np.abs(st.hess_inv_d2)) < 1e-4


def test_cofactor_is_divergence_free(bumpy, pentagon):
    p = interior_points(pentagon, 8, seed=9, margin=0.15)
    cof = lambda q: hessian_package(bumpy.jet(q)).cofactor
    div = np.einsum("pijj->pi", _fd(cof, p, 1e-5))
    assert np.max(np.abs(div)) < 1e-6


@pytest.mark.parametrize("origin", [(0.0, 0.0), (0.3, -0.1)])
def test_h_gradient_identity(bumpy, pentagon, origin):
    st = hessian_package(bumpy.jet(interior_points(pentagon, 50, seed=10)))
    assert np.max(vector_fields(st, 1.0, origin).h_grad_residual) < 1e-10


def test_square_w_vanishes_for_centred_origin(square_gold, square):
    p = interior_points(square, 40, seed=12)
    st = hessian_package(square_gold.jet(p))
    np.testing.assert_allclose(st.v, 2 * (p - 0.5), atol=1e-12)
    np.testing.assert_allclose(vector_fields(st, 4.0, [0.5, 0.5]).w, 0.0, atol=1e-12)


def test_lowered_F_matches_direct_formula(bumpy, pentagon):
    j = bumpy.jet(interior_points(pentagon, 30, seed=13))
    st = hessian_package(j)
    F = curvature_tensors(st).F_lower
    np.testing.assert_allclose(F, lowered_F_direct(j, st.hess_inv), rtol=1e-10, atol=1e-10 * np.max(np.abs(F)))


def test_F_symmetries(bumpy, pentagon):
    pack = curvature_tensors(hessian_package(bumpy.jet(interior_points(pentagon, 10, seed=14))))
    F = pack.F_lower
    np.testing.assert_allclose(F, np.swapaxes(F, 1, 2), atol=1e-10 * np.max(np.abs(F)))
    np.testing.assert_allclose(F, np.transpose(F, (0, 3, 4, 1, 2)), atol=1e-10 * np.max(np.abs(F)))


def test_variation_identity(bumpy, pentagon):
    """d/dt (|F|^2 - |G|^2) of u + t eps equals 2 div Z."""
    rng = np.random.default_rng(15)
    eps_pot = SymplecticPotential(pentagon, rng.standard_normal((5, 5)))
    eps_jet = lambda q: eps_pot.correction_jet(q)
    p = interior_points(pentagon, 6, seed=16, margin=0.2)

    def energy(t, q):
        jt = bumpy.jet(q) + t * eps_jet(q)
        pack = curvature_tensors(hessian_package(jt))
        return pack.normF2 - pack.normG2

    h = 1e-5
    ddt = (energy(h, p) - energy(-h, p)) / (2 * h)
    Z = lambda q: variation_ZW(hessian_package(bumpy.jet(q)), eps_jet(q))[0]
    div = np.einsum("pii->p", _fd(Z, p, 1e-5))
    np.testing.assert_allclose(ddt, 2 * div, rtol=1e-5, atol=1e-6 * np.max(np.abs(ddt)))


def test_guillemin_metric_blocks(square_gold):
    st = hessian_package(square_gold.jet(np.array([[0.3, 0.4]])))
    g = guillemin_metric(st)
    np.testing.assert_allclose(g[0, :2, :2] @ g[0, 2:, 2:], np.eye(2), atol=1e-14)
    assert np.all(g[0, :2, 2:] == 0)


def test_epsilon_symbol():
    e = epsilon()
    assert e[0, 1] == 1 and e[1, 0] == -1 and e[0, 0] == 0
