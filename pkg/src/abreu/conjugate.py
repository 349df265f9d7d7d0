"""The conjugate function H of the divergence-free field w (n = 2, constant A).

w = v - (A/2)(x - origin) has zero divergence, so w^i = eps^{ij} H_j for a
function H, i.e. grad H = (-w^2, w^1).  H is recovered by integrating along
straight segments from the base point (the polygon is star-shaped about any
interior point) and compared with the piecewise linear boundary function b.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .calculus import hessian_package, vector_fields
from .errors import GeometryError
from .potential import interior_grid
from .quadrature import gauss_legendre

SEGMENT_ORDER = 8
SEGMENT_TOL = 1e-13


def grad_H(pot, A, origin, points):
    """grad H = (-w^2, w^1) at interior points."""
    state = hessian_package(pot.jet(points))
    w = vector_fields(state, A, origin).w
    return np.stack([-w[..., 1], w[..., 0]], axis=-1)


def segment_integrals(field, a, b, tol=SEGMENT_TOL, order=SEGMENT_ORDER, max_panels=4096):
    """int_a^b field . dl along straight segments, vectorized over rows.

    Composite Gauss-Legendre with the panel count doubled until two
    successive values agree to ``tol`` (absolute, scaled by the segment
    length).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    d = b - a
    x, w = gauss_legendre(order)

    def value(idx, panels):
        s = ((np.arange(panels)[:, None] + x[None, :]) / panels).ravel()
        ws = np.tile(w, panels) / panels
        pts = a[idx, None, :] + s[None, :, None] * d[idx, None, :]
        g = field(pts.reshape(-1, 2)).reshape(len(idx), len(s), 2)
        return np.einsum("psi,pi,s->p", g, d[idx], ws)

    out = np.zeros(len(a))
    idx = np.arange(len(a))
    panels = 1
    prev = value(idx, panels)
    while len(idx):
        panels *= 2
        if panels > max_panels:
            raise GeometryError("segment quadrature did not converge")
        cur = value(idx, panels)
        scale = np.maximum(1.0, np.linalg.norm(d[idx], axis=1))
        ok = np.abs(cur - prev) <= tol * scale
        out[idx[ok]] = cur[ok]
        idx, prev = idx[~ok], cur[~ok]
    return out


@dataclass
class HamiltonianField:
    points: np.ndarray
    H: np.ndarray
    w: np.ndarray
    origin: np.ndarray
    base_point: np.ndarray
    A: float
    loop_closure: float
    QH_residual: float
    sup_grad_H: float

    def diagnostics(self):
        return {
            "loop_closure": self.loop_closure,
            "QH_residual": self.QH_residual,
            "sup_grad_H": self.sup_grad_H,
        }


class Conjugate:
    """H for a potential, with helpers shared by the diagnostics."""

    def __init__(self, pot, A, origin=None):
        if callable(A):
            raise ValueError("the conjugate function needs a constant A")
        self.pot = pot
        self.A = float(A)
        self.poly = pot.polygon
        self.origin = self.poly.base_point if origin is None else np.asarray(origin, dtype=float)

    def grad(self, points):
        return grad_H(self.pot, self.A, self.origin, points)

    def __call__(self, points):
        """H at interior points, H(base_point) = 0."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if np.any(self.poly.distance(points) <= 0):
            raise GeometryError("H requested outside the open polygon")
        return segment_integrals(self.grad, self.poly.base_point, points)

    def local_difference(self, x, y):
        """H(y) - H(x) along the segment x -> y."""
        return segment_integrals(self.grad, x, y)

    def QH(self, points, h=1e-3):
        """|U^{ij} H_ij| / |U|_F from central second differences of H."""
        points = np.atleast_2d(points)
        e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
        D = lambda off: self.local_difference(points, points + off)
        Hxx = (D(e1) + D(-e1)) / h ** 2
        Hyy = (D(e2) + D(-e2)) / h ** 2
        Hxy = (D(e1 + e2) - D(e1 - e2) - D(-e1 + e2) + D(-e1 - e2)) / (4 * h * h)
        U = hessian_package(self.pot.jet(points)).cofactor
        q = U[:, 0, 0] * Hxx + 2 * U[:, 0, 1] * Hxy + U[:, 1, 1] * Hyy
        return np.abs(q) / np.linalg.norm(U, axis=(1, 2))

    def circulation(self, lo, hi, order=24):
        """Circulation of grad H around the rectangle [lo, hi] (counterclockwise)."""
        corners = np.array([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]], dtype=float)
        x, w = gauss_legendre(order)
        total = 0.0
        for k in range(4):
            p, q = corners[k], corners[(k + 1) % 4]
            pts = p + np.outer(x, q - p)
            total += float(np.dot(self.grad(pts) @ (q - p), w))
        return total


def hamiltonian(pot, A, grid=21, origin=None, rectangles=200, seed=0, qh_margin=0.05):
    """H on an interior grid plus loop-closure and Q(H) diagnostics."""
    conj = Conjugate(pot, A, origin)
    poly = conj.poly
    pts = interior_grid(poly, grid, 1e-3 * poly.diameter)
    H = conj(pts)
    state = hessian_package(pot.jet(pts))
    w = vector_fields(state, conj.A, conj.origin).w
    loop = loop_closure(conj, rectangles, seed)
    inner = pts[poly.distance(pts) >= qh_margin]
    qh = float(np.max(conj.QH(inner))) if len(inner) else 0.0
    return HamiltonianField(pts, H, w, conj.origin, poly.base_point, conj.A, loop, qh,
                            float(np.max(np.linalg.norm(w, axis=-1))))


def loop_closure(conj, rectangles=200, seed=0):
    """Max of |circulation| / perimeter over random rectangles inside the polygon."""
    rng = np.random.default_rng(seed)
    poly = conj.poly
    (x0, y0), (x1, y1) = poly.bounding_box
    worst, made = 0.0, 0
    while made < rectangles:
        p = rng.uniform([x0, y0], [x1, y1], size=(2, 2))
        lo, hi = p.min(axis=0), p.max(axis=0)
        corners = np.array([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
        if np.min(hi - lo) < 1e-3 * poly.diameter or np.any(poly.distance(corners) <= 1e-3 * poly.diameter):
            continue
        made += 1
        per = 2 * float(np.sum(hi - lo))
        worst = max(worst, abs(conj.circulation(lo, hi)) / per)
    return worst


@dataclass
class BoundaryComparison:
    deviation: float
    shift: float
    samples: np.ndarray
    extrapolated: np.ndarray
    b_values: np.ndarray
    flagged: bool


def boundary_compare(conj, b, distances=(1e-2, 5e-3, 2.5e-3), fractions=(0.25, 0.5, 0.75)):
    """Extrapolate H to boundary points and compare with b up to a constant.

    Edge points are approached along the inward normal, vertices along the
    ray toward the base point; the three samples are fitted by a quadratic
    in the distance and evaluated at zero.
    """
    poly = conj.poly
    targets, dirs, bvals = [], [], []
    for k in range(poly.n_edges):
        targets.append(poly.vertices[k])
        r = poly.base_point - poly.vertices[k]
        dirs.append(r / np.linalg.norm(r))
        bvals.append(b.vertex_values[k])
        for s in fractions:
            targets.append(poly.edge_point(k, s))
            dirs.append(poly.inward_normals[k])
            bvals.append(b.on_edge(k, s))
    targets, dirs, bvals = np.array(targets), np.array(dirs), np.array(bvals)
    ds = np.asarray(distances, dtype=float)
    samples = np.stack([conj(targets + d * dirs) for d in ds], axis=1)
    V = np.vander(ds, len(ds))
    coef = np.linalg.solve(V, samples.T)
    H0 = coef[-1]
    last, prev = samples[:, -1], samples[:, -2]
    flagged = bool(np.any(np.abs(H0 - last) > 10 * np.abs(last - prev) + 1e-12))
    diff = H0 - bvals
    shift = 0.5 * (diff.max() + diff.min())
    return BoundaryComparison(float(np.max(np.abs(diff - shift))), float(shift), samples, H0, bvals, flagged)


def three_point_K(poly, b, tol=1e-12):
    """Max over vertex triples of |grad| of the plane through (X_i, b(X_i))."""
    V = poly.vertices
    vals = np.asarray(b.vertex_values if hasattr(b, "vertex_values") else b, dtype=float)
    best = 0.0
    for i, j, k in combinations(range(len(V)), 3):
        M = np.array([V[j] - V[i], V[k] - V[i]])
        if abs(np.linalg.det(M)) <= tol * poly.diameter ** 2:
            continue
        g = np.linalg.solve(M, [vals[j] - vals[i], vals[k] - vals[i]])
        best = max(best, float(np.linalg.norm(g)))
    return best


@dataclass
class VBoundReport:
    K: float
    sup_w: float
    sup_v: float
    v_bound: float
    passed: bool

    def to_dict(self):
        return dict(K=self.K, sup_w=self.sup_w, sup_v=self.sup_v, v_bound=self.v_bound, passed=self.passed)


def v_bound_check(pot, A, K, points, origin=None, tol=1e-6):
    """sup |w| <= K (+ tol) and sup |v| <= K + (A/2) max |x - origin|."""
    poly = pot.polygon
    origin = poly.base_point if origin is None else np.asarray(origin, dtype=float)
    state = hessian_package(pot.jet(points))
    vf = vector_fields(state, A, origin)
    sup_w = float(np.max(np.linalg.norm(vf.w, axis=-1)))
    sup_v = float(np.max(np.linalg.norm(vf.v, axis=-1)))
    reach = float(np.max(np.linalg.norm(poly.vertices - origin, axis=1)))
    bound = K + 0.5 * A * reach
    return VBoundReport(K, sup_w, sup_v, bound, sup_w <= K + tol and sup_v <= bound + tol)


@dataclass
class TransferReport:
    K: float
    max_ratio: float
    worst_margin: float
    pairs: int
    passed: bool

    def to_dict(self):
        return dict(K=self.K, max_ratio=self.max_ratio, worst_margin=self.worst_margin,
                    pairs=self.pairs, passed=self.passed)


def l_transfer_check(pot, K_v, x, y):
    """|L(x) - L(y)| <= K_v |grad u(x) - grad u(y)| on each pair of rows."""
    jx, jy = pot.jet(np.atleast_2d(x)), pot.jet(np.atleast_2d(y))
    Lx = np.log(hessian_package(jx).det_hess)
    Ly = np.log(hessian_package(jy).det_hess)
    lhs = np.abs(Lx - Ly)
    rhs = K_v * np.linalg.norm(jx.grad - jy.grad, axis=-1)
    margin = rhs - lhs
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, 0.0)
    return TransferReport(float(K_v), float(np.max(ratio)), float(np.min(margin)), len(lhs),
                          bool(np.all(margin >= -1e-12)))
