"""The linear functional L(f) = int_boundary f dsigma - int A f and its
stability constant, probed with single-crease piecewise linear functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polytope import clip_halfplane, measures_and_A, polygon_area_centroid
from .quadrature import edge_rule, fan_rule, gauss_legendre, polygon_rule


@dataclass(frozen=True)
class CreasedPL:
    """f(x) = max(0, <a, x> + c)."""

    a: np.ndarray
    c: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (2,) or not np.any(a):
            raise ValueError("crease direction must be a nonzero 2-vector")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", float(self.c))

    def linear(self, x):
        return np.asarray(x, dtype=float) @ self.a + self.c

    def __call__(self, x):
        return np.maximum(self.linear(x), 0.0)

    def is_normalized(self, base_point):
        return self.linear(base_point) < 0

    def to_dict(self):
        return {"a": self.a.tolist(), "c": self.c}


@dataclass(frozen=True)
class LinfuncValue:
    value: float
    boundary: float
    area: float


def _is_constant(A):
    return not callable(A)


def creased_boundary_integral(poly, f):
    """Exact int_boundary max(0, g) dsigma for affine g."""
    total = 0.0
    V = poly.vertices
    g = f.linear(V)
    for k in range(poly.n_edges):
        g0, g1 = g[k], g[(k + 1) % poly.n_edges]
        length = poly.edge_lengths[k] * poly.sigma[k]
        if g0 >= 0 and g1 >= 0:
            total += 0.5 * length * (g0 + g1)
        elif g0 > 0 or g1 > 0:
            pos = max(g0, g1)
            total += 0.5 * length * pos * pos / abs(g1 - g0)
    return total


def creased_area_integral(poly, f, A):
    """int A max(0, g) over the polygon, exactly for constant A."""
    piece = clip_halfplane(poly.vertices, f.a, f.c)
    if len(piece) < 3:
        return 0.0
    if _is_constant(A):
        area, centroid = polygon_area_centroid(piece)
        return float(A) * area * float(f.linear(centroid))
    pts, w = polygon_rule(piece, order=10)
    return float(np.dot(_A_values(A, pts) * f.linear(pts), w))


def _A_values(A, pts):
    if _is_constant(A):
        return np.full(len(pts), float(A))
    return np.broadcast_to(np.asarray(A(pts[:, 0], pts[:, 1]), dtype=float), (len(pts),))


def linfunc(poly, A, f, levels=12):
    """L(f) with its boundary and area parts.

    CreasedPL inputs use exact clipping formulas; other callables use the
    boundary-graded rules (the integrand may be singular in derivatives but
    must be continuous up to the boundary).
    """
    if isinstance(f, CreasedPL):
        b = creased_boundary_integral(poly, f)
        a = creased_area_integral(poly, f, A)
    else:
        ep, ew, _ = edge_rule(poly, levels=levels)
        b = float(np.dot(f(ep), ew))
        pts, w = fan_rule(poly, levels=levels)
        a = float(np.dot(_A_values(A, pts) * f(pts), w))
    return LinfuncValue(b - a, b, a)


def linfunc_split(poly, A, f, crease, order=8):
    """Quadrature value of L(f) with cells split along a crease line.

    ``crease`` is a CreasedPL whose zero line is used to cut both the polygon
    and the edges, so a function with a kink there is integrated piecewise
    smoothly.
    """
    b = 0.0
    x, w = gauss_legendre(order)
    V = poly.vertices
    g = crease.linear(V)
    for k in range(poly.n_edges):
        g0, g1 = g[k], g[(k + 1) % poly.n_edges]
        cuts = [0.0, 1.0]
        if (g0 < 0) != (g1 < 0):
            cuts = [0.0, g0 / (g0 - g1), 1.0]
        scale = poly.edge_lengths[k] * poly.sigma[k]
        for s0, s1 in zip(cuts[:-1], cuts[1:]):
            s = s0 + (s1 - s0) * x
            b += float(np.dot(f(poly.edge_point(k, s)), w * (s1 - s0))) * scale
    a = 0.0
    for sign in (1.0, -1.0):
        piece = clip_halfplane(V, sign * crease.a, sign * crease.c)
        if len(piece) >= 3:
            pts, wts = polygon_rule(piece, order)
            a += float(np.dot(_A_values(A, pts) * f(pts), wts))
    return LinfuncValue(b - a, b, a)


@dataclass(frozen=True)
class KernelReport:
    residuals: tuple
    tolerance: float
    passed: bool


def affine_kernel_check(poly, A, rel_tol=1e-10):
    """Residuals (L(1), L(x), L(y)); pass iff each is below rel_tol * Vol(boundary)."""
    area, bvol, _ = measures_and_A(poly)
    mids = 0.5 * (poly.vertices + np.roll(poly.vertices, -1, axis=0))
    weights = poly.sigma * poly.edge_lengths
    boundary = np.array([bvol, *(weights @ mids)])
    if _is_constant(A):
        _, centroid = polygon_area_centroid(poly.vertices)
        inner = float(A) * area * np.array([1.0, *centroid])
    else:
        pts, w = polygon_rule(poly.vertices, order=12)
        a = _A_values(A, pts) * w
        inner = np.array([a.sum(), a @ pts[:, 0], a @ pts[:, 1]])
    res = boundary - inner
    tol = rel_tol * bvol
    return KernelReport(tuple(float(r) for r in res), tol, bool(np.all(np.abs(res) < tol)))


@dataclass
class LambdaReport:
    lambda_lb: float
    argmax: dict
    destabilizer: dict
    kernel: KernelReport
    evaluated: int
    skipped: int
    directions: int
    offsets: int

    def to_dict(self):
        return {
            "lambda_lb": self.lambda_lb,
            "argmax": self.argmax,
            "destabilizer": self.destabilizer,
            "kernel_residuals": list(self.kernel.residuals),
            "kernel_passed": self.kernel.passed,
            "evaluated": self.evaluated,
            "skipped": self.skipped,
            "directions": self.directions,
            "offsets": self.offsets,
        }


def crease_family(poly, directions=180, offsets=100):
    """Yield (d, k, CreasedPL or None) over the sweep grid in lexicographic order.

    Crease d, k is <a_d, x> = s_k with a_d at angle 2 pi d / D and s_k spread
    over the support interval of the polygon; None marks creases whose
    positive side contains the base point (not normalized).
    """
    x0 = poly.base_point
    margin = 1e-12 * poly.diameter
    for d in range(directions):
        th = 2 * np.pi * d / directions
        a = np.array([np.cos(th), np.sin(th)])
        proj = poly.vertices @ a
        lo, hi = proj.min(), proj.max()
        for k in range(1, offsets):
            s = lo + (hi - lo) * k / offsets
            yield d, k, (CreasedPL(a, -s) if s > a @ x0 + margin else None)


def lambda_lower_bound(poly, A, directions=180, offsets=100):
    """Largest ratio int_boundary f / L(f) over the crease sweep.

    Creases with L(f) <= 0 and positive boundary integral are reported as
    destabilizers (the first one in sweep order); they never contribute a
    lambda value.
    """
    kernel = affine_kernel_check(poly, A)
    best, arg, destab = -np.inf, None, None
    evaluated = skipped = 0
    for d, k, f in crease_family(poly, directions, offsets):
        if f is None:
            skipped += 1
            continue
        evaluated += 1
        val = linfunc(poly, A, f)
        if val.value <= 0:
            if val.boundary > 0 and destab is None:
                destab = {"direction_index": d, "offset_index": k, **f.to_dict(),
                          "L": val.value, "boundary": val.boundary}
            continue
        ratio = val.boundary / val.value
        if ratio > best:
            best = ratio
            arg = {"direction_index": d, "offset_index": k, **f.to_dict(),
                   "L": val.value, "boundary": val.boundary, "ratio": ratio}
    return LambdaReport(float(best) if arg else float("nan"), arg, destab, kernel,
                        evaluated, skipped, directions, offsets)
