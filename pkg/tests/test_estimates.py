import math

import numpy as np
import pytest

from abreu import fileio
from abreu.errors import InputError
from abreu.estimates import (ALL_CHECKS, CheckRecord, CylinderBarrier, VerificationReport, VerifyConfig,
                             barrier_lower_bound, boundary_asymptotics, chi_invariant, curvature_reports,
                             interior_bounds_report, phi_values, pogorelov_check, pogorelov_constant,
                             disc_identity, section_upper_bound, verify)
from abreu.polytope import ConvexRegion
from abreu.potential import QuadraticPotential, RescaledPotential, convexity_audit

from conftest import interior_points


def centred_square(half, c=0.5):
    return ConvexRegion([[c - half, c - half], [c + half, c - half], [c + half, c + half], [c - half, c + half]])


# -- barrier ------------------------------------------------------------------


def test_barrier_constant():
    bar = CylinderBarrier()
    assert bar.b == pytest.approx(1 / 3)
    assert bar.C == pytest.approx(0.05, rel=1e-14)


@pytest.mark.parametrize("x, y", [(0.0, 0.5), (0.7, 0.2), (-1.0, 1.0), (0.3, 0.05)])
def test_barrier_ratio_matches_finite_differences(x, y):
    bar = CylinderBarrier()
    h = 1e-4
    r = bar.r
    rxx = (r(x + h, y) - 2 * r(x, y) + r(x - h, y)) / h ** 2
    ryy = (r(x, y + h) - 2 * r(x, y) + r(x, y - h)) / h ** 2
    rxy = (r(x + h, y + h) - r(x + h, y - h) - r(x - h, y + h) + r(x - h, y - h)) / (4 * h * h)
    assert (rxx * ryy - rxy ** 2) / -r(x, y) == pytest.approx(bar.ratio(x, y), rel=1e-5)
    assert bar.ratio(x, y) >= bar.C - 1e-14


def test_barrier_rejects_bad_parameters():
    with pytest.raises(ValueError):
        CylinderBarrier(alpha=1.2)
    with pytest.raises(ValueError):
        CylinderBarrier(alpha=0.5, b=1.9)


def test_barrier_bound_square(square_gold):
    det, barrier, psi, _ = barrier_lower_bound(square_gold, 4.0, [[0.01, 0.5], [0.5, 0.5]])
    assert det[0] == pytest.approx(4 * (100 + 1 / 0.99), rel=1e-12)
    assert np.all(det >= barrier) and np.all(det >= psi)
    assert np.all(barrier > 0)
    det, barrier, psi, _ = barrier_lower_bound(square_gold, 0.0, [[0.01, 0.5]])
    assert barrier[0] == 0 and psi[0] == 0


# -- upper bound on sections --------------------------------------------------------


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
def test_upper_bound_on_a_quadratic(t):
    q = QuadraticPotential(np.eye(2), [0.0, 0.0])
    r = section_upper_bound(q, 0.0, [0.0, 0.0], t)
    # grad u~ sweeps the disc of radius sqrt(2t): C = 1.01 * 2t
    assert r["C"] == pytest.approx(1.01 * 2 * t, rel=2e-3)
    assert r["passed"] and r["margin"] > 0


def test_upper_bound_square_and_rescaling(square_gold):
    base = section_upper_bound(square_gold, 4.0, [0.5, 0.5], 0.1)
    assert base["passed"]
    # the inequality is invariant under u -> u(sqrt(t) y)/t; compare the margins
    res = RescaledPotential(square_gold, 4.0, np.eye(2), np.array([0.5, 0.5]))
    moved = section_upper_bound(res, 4.0, [0.0, 0.0], 0.1 / 4.0)
    assert moved["passed"]


def test_asymptotics_square(square_gold):
    rows = boundary_asymptotics(square_gold)
    assert len(rows) == 4
    for row in rows:
        assert row["limit"] == pytest.approx(4.0, rel=0.02)
        assert not row["flagged"]


def test_asymptotics_simplex(simplex_gold):
    limits = [r["limit"] for r in boundary_asymptotics(simplex_gold)]
    assert all(v > 0 and math.isfinite(v) for v in limits)


# -- integral identity on discs ------------------------------------------------------


def test_disc_exact_at_symmetric_centre(square_gold):
    r = disc_identity(square_gold, 4.0, [0.5, 0.5], 0.2)
    assert r["relative_residual"] < 1e-10
    assert abs(r["L0_minus_avg"]) <= r["bound_rhs"]
    assert abs(r["solution_defect"]) < 1e-12


@pytest.mark.parametrize("center", [(0.35, 0.55), (0.3, 0.3)])
def test_disc_quadrature_converges_off_centre(square_gold, center):
    q = [disc_identity(square_gold, 4.0, center, 0.2, n_theta=n)["quadrature_residual"] for n in (4, 8, 16)]
    assert q[1] <= 0.5 * q[0] and q[2] <= 0.5 * q[1]
    assert q[2] < 1e-6


def test_disc_disc_must_fit(square_gold):
    with pytest.raises(InputError):
        disc_identity(square_gold, 4.0, [0.1, 0.5], 0.2)


# -- Pogorelov-type bound ------------------------------------------------------------------


def test_pogorelov_constant_closed_form():
    K, N = pogorelov_constant(1.0, 0.0, 0.0, 1.0)
    assert N == 2
    assert K == pytest.approx(0.5 * math.exp(0.5) * (2 + math.sqrt(8)), rel=1e-15)


@pytest.mark.parametrize("c", [0.1, 1.0])
def test_pogorelov_on_a_quadratic(c):
    q = QuadraticPotential(np.eye(2), [0.0, 0.0])
    r = pogorelov_check(q, c, center=[0.0, 0.0])
    assert r["lhs"] == pytest.approx(c, rel=1e-12)
    assert r["c1"] == pytest.approx(0.0, abs=1e-12) and r["c2"] == pytest.approx(0.0, abs=1e-12)
    assert r["c3"] == pytest.approx(1.01 * math.sqrt(2 * c), rel=1e-6)
    assert r["passed"]


def test_pogorelov_square(square_gold):
    r = pogorelov_check(square_gold, 0.1)
    assert r["passed"] and r["lhs"] == pytest.approx(0.4, rel=1e-3)


# -- chi -------------------------------------------------------------------------------


def _outer(a, b):
    return np.outer(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


BUMP = [0, 0, 1, -2, 1]   # x^2 (1 - x)^2


@pytest.fixture(scope="module")
def square_family(square_gold):
    perturbations = [0.05 * _outer(BUMP, BUMP), 0.1 * _outer([0, 0, 1], [0, 0, 1]),
                     0.05 * (_outer([0, 0, 0, 0, 1], [1]) + _outer([1], [0, 0, 0, 0, 1]))]
    out = [square_gold]
    for p in perturbations:
        padded = np.zeros((5, 5))
        padded[:p.shape[0], :p.shape[1]] = p
        out.append(square_gold.with_polynomial(padded))
    return out


def test_family_is_convex(square_family):
    assert all(convexity_audit(p).convex for p in square_family)


def test_chi_is_invariant_on_the_square(square_family):
    r = chi_invariant(square_family)
    assert not r["inconclusive"]
    np.testing.assert_allclose(r["values"], -8.0, atol=1e-3)
    assert r["spread"] < 1e-3


def test_chi_simplex(simplex_gold):
    r = chi_invariant([simplex_gold])
    assert not r["inconclusive"]
    assert r["values"][0] == pytest.approx(-12.0, abs=1e-3)


# -- interior bounds and curvature -------------------------------------------------------


def test_interior_bounds_square(square_gold):
    r = interior_bounds_report(square_gold)
    assert r["boundary_integral"] == pytest.approx(8 * math.log(2) - 2, abs=1e-10)
    assert r["implied_lambda"] == pytest.approx(4 * math.log(2) - 1, abs=1e-10)
    assert r["sup_grad_d2"] > 0


def test_curvature_square(square_gold):
    r = curvature_reports(square_gold, [0.5, 0.5], 0.25, centred_square(0.2))
    assert r["E"] == pytest.approx(math.pi / 2, rel=1e-10)
    assert r["G2_center"] == pytest.approx(8.0, rel=1e-10)
    assert r["Phi_max"] > 0


def test_phi_is_scale_invariant(square_gold):
    t = 2.0
    c = np.array([0.5, 0.5])
    K = centred_square(0.2)
    res = RescaledPotential(square_gold, t, np.eye(2), c)
    K_star = ConvexRegion(res.from_base(K.vertices))
    pts = c + np.array([[0.0, 0.0], [0.05, -0.1], [0.12, 0.03]])
    np.testing.assert_allclose(phi_values(res, K_star, res.from_base(pts)), phi_values(square_gold, K, pts),
                               rtol=1e-9)


# -- verification driver -------------------------------------------------------------------


def test_report_rejects_duplicates():
    rep = VerificationReport()
    rep.add(CheckRecord("a", "x", 0.0, 1.0, 1.0, True))
    with pytest.raises(ValueError):
        rep.add(CheckRecord("a", "y", 0.0, 1.0, 1.0, True))


@pytest.mark.parametrize("which", ["square", "simplex"])
def test_verify_passes_on_gold(which, request):
    pot = request.getfixturevalue(f"{which}_gold")
    A = {"square": 4.0, "simplex": 6.0}[which]
    report = verify(pot, A)
    failing = [r.id for r in report.records if not r.passed]
    assert report.passed, failing
    ids = [r.id for r in report.records]
    assert len(ids) == len(set(ids))
    assert any(i.startswith("upper_bound_") for i in ids)


def test_verify_output_is_deterministic(square_gold):
    a = fileio.dumps(verify(square_gold, 4.0).to_dict())
    b = fileio.dumps(verify(square_gold, 4.0, config=VerifyConfig(threads=4)).to_dict())
    assert a == b


def test_verify_subset_and_unknown(square_gold):
    rep = verify(square_gold, 4.0, checks=["asymptotics"])
    assert [r.id for r in rep.records] == ["asymptotics"]
    with pytest.raises(InputError):
        verify(square_gold, 4.0, checks=["nope"])
    assert set(ALL_CHECKS) >= {"barrier", "upper_bound", "disc"}
