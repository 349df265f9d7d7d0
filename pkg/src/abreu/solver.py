"""Damped Gauss-Newton collocation solver for S(u) = A and the functional F.

The unknown is the Bernstein correction f.  Affine functions do not change
S(u), so the iteration runs in the orthogonal complement of the affine
coefficient directions; this removes the three-dimensional null space of the
Jacobian.  The converged potential is normalized at the base point.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import warnings

import numpy as np

from .calculus import abreu_S_forms, hessian_package
from .errors import BarrierError, ConvexityError, DivergedError
from .potential import (DEFAULT_DEGREE, Jet4, SymplecticPotential, affine_free_basis,
                        canonical_potential, interior_grid, normalize, project_affine_free)
from .quadrature import DEFAULT_LEVELS, DEFAULT_ORDER, edge_rule, fan_rule

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveConfig:
    degree: int = DEFAULT_DEGREE
    grid: int = 30
    d_min_factor: float = 1e-2
    tol_residual: float = 1e-8
    max_iter: int = 50
    backtrack: float = 0.5
    min_step: float = 1e-6
    convexity_safeguard: bool = True
    fd_step: float = 1e-7
    tikhonov: float = 1e-12
    threads: int = 1
    track_energy: bool = False

    def __post_init__(self):
        if self.degree < 0 or self.grid < 1 or self.max_iter < 1:
            raise ValueError("degree, grid and max_iter must be positive")
        if not (self.tol_residual > 0 and 0 < self.backtrack < 1 and self.min_step > 0):
            raise ValueError("tolerances must be positive and 0 < backtrack < 1")


@dataclass
class SolveResult:
    potential: SymplecticPotential
    residual_rms: float
    residual_max: float
    iterations: int
    functional_value: float
    converged: bool
    A: object = None
    history: list = field(default_factory=list)
    energy_history: list = field(default_factory=list)


def as_A_function(A):
    """Vectorized callable for a constant or a function of (x, y)."""
    if callable(A):
        def fn(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(np.asarray(A(x[..., 0], x[..., 1]), dtype=float), x.shape[:-1])
        return fn
    c = float(A)
    return lambda x: np.full(np.shape(x)[:-1], c)


def residual_vector(pot, A, points, cross_check=True):
    """S(u)(x_p) - A(x_p) via form 1, cross-checked against form 4 at 1% of points."""
    state = hessian_package(pot.jet(points))
    r = state.S - as_A_function(A)(points)
    if cross_check and np.size(r):
        idx = np.arange(0, np.size(r), 100)
        sub = hessian_package(pot.jet(np.reshape(points, (-1, 2))[idx]))
        S1, S4, _, _ = abreu_S_forms(sub)
        if np.max(np.abs(S1 - S4) / np.maximum(1.0, np.abs(S1))) > 1e-6:
            warnings.warn("form-1 and form-4 evaluations of S disagree", RuntimeWarning)
    return r


@dataclass(frozen=True)
class FunctionalParts:
    """The three integrals entering the functional."""

    log_det: float
    area: float
    boundary: float

    @property
    def literal(self):
        """-int log det + int A u - int_boundary u dsigma, as written."""
        return -self.log_det + self.area - self.boundary

    @property
    def energy(self):
        """-int log det + L(u); its critical points solve S(u) = A."""
        return -self.log_det + self.boundary - self.area

    @property
    def L(self):
        return self.boundary - self.area


def functional_parts(pot, A, order=DEFAULT_ORDER, levels=DEFAULT_LEVELS):
    poly = pot.polygon
    pts, w = fan_rule(poly, order=order, levels=levels)
    jet = pot.jet(pts)
    det = jet.hess[..., 0, 0] * jet.hess[..., 1, 1] - jet.hess[..., 0, 1] ** 2
    ep, ew, _ = edge_rule(poly, order=order, levels=levels)
    return FunctionalParts(float(np.dot(np.log(det), w)),
                           float(np.dot(as_A_function(A)(pts) * jet.value, w)),
                           float(np.dot(pot.value(ep), ew)))


def functional_F(pot, A, order=DEFAULT_ORDER, levels=DEFAULT_LEVELS):
    """F(u) = -int log det u_ij + int A u - int_boundary u dsigma."""
    return functional_parts(pot, A, order, levels).literal


def energy_functional(pot, A, order=DEFAULT_ORDER, levels=DEFAULT_LEVELS):
    """-int log det u_ij + L(u), the convex functional minimized by solutions."""
    return functional_parts(pot, A, order, levels).energy


class _Collocation:
    """Jets at fixed collocation points, affine in the free parameters."""

    def __init__(self, pot, points):
        self.points = points
        base = pot.canonical_jet(points)
        self.base = (base.hess, base.d3, base.d4)
        m = pot.degree
        self.basis = affine_free_basis(m)
        n = self.basis.shape[1]
        cols = [pot.correction_jet(points, self.basis[:, k].reshape(m + 1, m + 1)) for k in range(n)]
        self.dh = np.stack([c.hess for c in cols])
        self.d3 = np.stack([c.d3 for c in cols])
        self.d4 = np.stack([c.d4 for c in cols])

    @property
    def n_params(self):
        return self.basis.shape[1]

    def jet(self, p):
        h = self.base[0] + np.tensordot(p, self.dh, axes=1)
        t = self.base[1] + np.tensordot(p, self.d3, axes=1)
        q = self.base[2] + np.tensordot(p, self.d4, axes=1)
        return Jet4.from_full(self.points, np.zeros(len(self.points)), np.zeros((len(self.points), 2)), h, t, q)

    def S(self, p):
        return hessian_package(self.jet(p)).S

    def convex(self, p):
        h = self.base[0] + np.tensordot(p, self.dh, axes=1)
        det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] ** 2
        return bool(np.all(det > 0) and np.all(h[:, 0, 0] > 0))


def _jacobian(col, p, S0, A_pts, step, threads):
    def column(k):
        h = step * max(1.0, abs(p[k]))
        q = p.copy()
        q[k] += h
        return (col.S(q) - S0) / h

    ks = range(col.n_params)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            cols = list(ex.map(column, ks))
    else:
        cols = [column(k) for k in ks]
    return np.stack(cols, axis=1)


def solve(poly, A, config=SolveConfig(), start=None):
    """Solve S(u) = A for the correction f by damped Gauss-Newton.

    ``start`` optionally gives initial Bernstein coefficients (projected onto
    the affine-free subspace); the default is the canonical potential.
    """
    _warn_if_kernel_fails(poly, A)
    pot = canonical_potential(poly, config.degree)
    m = config.degree
    points = interior_grid(poly, config.grid, config.d_min_factor * poly.diameter)
    col = _Collocation(pot, points)
    if len(points) < col.n_params:
        raise ValueError("collocation grid has fewer points than free coefficients")
    A_pts = as_A_function(A)(points)
    if start is None:
        p = np.zeros(col.n_params)
    else:
        p = col.basis.T @ project_affine_free(np.asarray(start, dtype=float)).ravel()
    if not col.convex(p):
        raise ConvexityError("starting potential is not convex at the collocation points")

    def make(p):
        return normalize(pot.replace(coefficients=(col.basis @ p).reshape(m + 1, m + 1)))

    S = col.S(p)
    r = S - A_pts
    rms = float(np.sqrt(np.mean(r ** 2)))
    history = [rms]
    fhist = [energy_functional(make(p), A)] if config.track_energy else []
    it = 0
    while rms >= config.tol_residual and it < config.max_iter:
        J = _jacobian(col, p, S, A_pts, config.fd_step, config.threads)
        JTJ = J.T @ J
        mu = config.tikhonov * max(1.0, float(np.trace(JTJ)) / len(JTJ))
        delta = -np.linalg.solve(JTJ + mu * np.eye(len(JTJ)), J.T @ r)
        lam, accepted, lost_convexity = 1.0, False, False
        while lam >= config.min_step:
            q = p + lam * delta
            if config.convexity_safeguard and not col.convex(q):
                lost_convexity = True
                lam *= config.backtrack
                continue
            Sq = col.S(q)
            rq = Sq - A_pts
            rms_q = float(np.sqrt(np.mean(rq ** 2)))
            if rms_q < rms:
                p, S, r, rms, accepted = q, Sq, rq, rms_q, True
                break
            lam *= config.backtrack
        it += 1
        if not accepted:
            if lost_convexity:
                raise BarrierError("line search could not keep the Hessian positive definite",
                                   residual=rms, iterations=it)
            break
        history.append(rms)
        if config.track_energy:
            fhist.append(energy_functional(make(p), A))
        log.debug("iteration %d: rms residual %.3e (step %.3g)", it, rms, lam)

    if rms >= config.tol_residual:
        raise DivergedError(f"no convergence after {it} iterations (rms residual {rms:.3e})",
                            residual=rms, iterations=it)
    result_pot = make(p)
    return SolveResult(result_pot, rms, float(np.max(np.abs(r))), it,
                       functional_F(result_pot, A), True, A, history, fhist)


def _warn_if_kernel_fails(poly, A):
    from .stability import affine_kernel_check

    report = affine_kernel_check(poly, A)
    if not report.passed:
        warnings.warn(f"A does not annihilate affine functions (residuals {report.residuals})",
                      RuntimeWarning)
