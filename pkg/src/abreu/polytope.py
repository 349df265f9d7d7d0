"""Convex polygons carrying a boundary measure.

A :class:`Polygon` stores its vertices counterclockwise, one density
``sigma[k]`` per edge (relative to Euclidean arclength on edge k, which
runs from vertex k to vertex k+1) and an interior base point.  Everything
else in the package (defining functions, the constant A, the boundary
function b) is derived from these three fields.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConsistencyError, DomainError, InputError

COLLINEAR_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


class ConvexRegion:
    """Strictly convex polygon given by counterclockwise vertices."""

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InputError("vertices must be a list of 2-vectors", "shape")
        if v.shape[0] < 3:
            raise InputError("a polygon needs at least 3 vertices", "vertex_count")
        if not np.all(np.isfinite(v)):
            raise InputError("non-finite vertex coordinate", "finite")
        e = np.roll(v, -1, axis=0) - v
        turn = cross2(e, np.roll(e, -1, axis=0))
        scale = np.max(np.linalg.norm(e, axis=1)) ** 2
        if np.any(turn <= COLLINEAR_TOL * scale):
            k = int(np.argmin(turn))
            raise InputError(
                f"vertex {(k + 1) % len(v)} is reflex, collinear or out of "
                "counterclockwise order",
                "strict_convexity",
            )
        self.vertices = _frozen(v)
        self.edge_vectors = _frozen(e)
        self.edge_lengths = _frozen(np.linalg.norm(e, axis=1))
        self.inward_normals = _frozen(np.stack([-e[:, 1], e[:, 0]], axis=1) / self.edge_lengths[:, None])
        self.offsets = _frozen(np.einsum("ki,ki->k", self.inward_normals, v))

    @property
    def n_edges(self):
        return len(self.vertices)

    def signed_distances(self, x):
        """Distance from ``x`` to every edge line, positive inside; shape (..., K)."""
        x = np.asarray(x, dtype=float)
        return x @ self.inward_normals.T - self.offsets

    def distance(self, x):
        return np.min(self.signed_distances(x), axis=-1)

    def contains(self, x, margin=0.0):
        return np.all(self.signed_distances(x) > margin, axis=-1)

    @property
    def area(self):
        v = self.vertices
        return 0.5 * float(np.sum(cross2(v, np.roll(v, -1, axis=0))))

    @property
    def centroid(self):
        return polygon_area_centroid(self.vertices)[1]

    @property
    def diameter(self):
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)))

    @property
    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def exit_distance(self, x, direction):
        """Distance from interior ``x`` along unit ``direction`` to the boundary."""
        x = np.asarray(x, dtype=float)
        direction = np.asarray(direction, dtype=float)
        rate = direction @ self.inward_normals.T
        dist = self.signed_distances(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rate < 0, dist / np.where(rate < 0, -rate, 1.0), np.inf)
        return np.min(t, axis=-1)

    def edge_point(self, k, s):
        """Point at fraction ``s`` along edge k."""
        return self.vertices[k] + np.multiply.outer(s, self.edge_vectors[k])

    def mapped(self, matrix, shift):
        """Image under x -> matrix @ x + shift (orientation-preserving)."""
        return ConvexRegion(self.vertices @ np.asarray(matrix, dtype=float).T + shift)


class Polygon(ConvexRegion):
    """Convex polygon with per-edge boundary densities and a base point."""

    def __init__(self, vertices, sigma, base_point):
        super().__init__(vertices)
        s = np.asarray(sigma, dtype=float)
        x0 = np.asarray(base_point, dtype=float)
        if s.shape != (len(self.vertices),):
            raise InputError("need exactly one sigma per edge", "sigma_count")
        if x0.shape != (2,):
            raise InputError("base_point must be a 2-vector", "shape")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(x0))):
            raise InputError("non-finite density or base point", "finite")
        if np.any(s <= 0):
            raise InputError("every edge sigma must be positive", "positive_sigma")
        self.sigma = _frozen(s)
        self.base_point = _frozen(x0)
        if np.any(self.signed_distances(x0) <= 0):
            raise InputError("base_point must lie strictly inside", "interior_base_point")

    def __repr__(self):
        return (f"Polygon(vertices={self.vertices.tolist()}, sigma={self.sigma.tolist()}, "
                f"base_point={self.base_point.tolist()})")

    def to_dict(self):
        return {
            "vertices": self.vertices.tolist(),
            "sigma": self.sigma.tolist(),
            "base_point": self.base_point.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["vertices"], data["sigma"], data["base_point"])
        except KeyError as exc:
            raise InputError(f"polygon is missing field {exc}", "fields") from None
        except InputError:
            raise
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed polygon: {exc}", "shape") from None

    def translated(self, shift):
        shift = np.asarray(shift, dtype=float)
        return Polygon(self.vertices + shift, self.sigma, self.base_point + shift)


def unit_square(side=1.0, sigma=1.0):
    s = float(side)
    return Polygon([[0, 0], [s, 0], [s, s], [0, s]], [sigma] * 4, [s / 2, s / 2])


def standard_simplex():
    """Right triangle with sigma making x, y, 1-x-y the defining functions."""
    return Polygon([[0, 0], [1, 0], [0, 1]], [1.0, 1 / math.sqrt(2), 1.0], [1 / 3, 1 / 3])


@dataclass(frozen=True)
class EdgeFrame:
    inward_unit_normal: np.ndarray
    offset: float
    sigma: float
    length: float

    def __call__(self, x):
        """Adapted defining function: zero on the edge, slope 1/sigma inward."""
        return (np.asarray(x, dtype=float) @ self.inward_unit_normal - self.offset) / self.sigma

    @property
    def gradient(self):
        return self.inward_unit_normal / self.sigma


def defining_functions(poly):
    n, c = poly.inward_normals, poly.offsets
    return [
        EdgeFrame(_frozen(n[k]), float(c[k]), float(poly.sigma[k]), float(poly.edge_lengths[k]))
        for k in range(poly.n_edges)
    ]


def boundary_distance(poly, x, tol=1e-12):
    d = np.min(poly.signed_distances(x), axis=-1)
    if np.any(d < -tol * max(1.0, poly.diameter)):
        raise DomainError(f"point outside the polygon (distance {np.min(d):.3g})")
    return np.maximum(d, 0.0)


def measures_and_A(poly):
    """Return (area, sigma-length of the boundary, A = ratio of the two)."""
    area = poly.area
    bvol = float(np.sum(poly.sigma * poly.edge_lengths))
    return area, bvol, bvol / area


@dataclass(frozen=True)
class BoundaryFunction:
    """Piecewise linear b on the boundary, parameterized by arclength.

    ``vertex_values[k]`` is b at vertex k; on edge k it increases at the
    constant rate ``density[k]`` (= sigma_k - tau_k) per unit length.
    """

    polygon: Polygon
    density: np.ndarray
    vertex_values: np.ndarray
    origin: np.ndarray
    A: float
    closure: float

    def on_edge(self, k, s):
        """b at fraction ``s`` of edge k."""
        return self.vertex_values[k] + np.asarray(s) * self.density[k] * self.polygon.edge_lengths[k]

    def __call__(self, x):
        """b at boundary points ``x`` (each assigned to its closest edge)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        poly = self.polygon
        k = np.argmin(np.abs(poly.signed_distances(x)), axis=1)
        e = poly.edge_vectors[k]
        s = np.einsum("pi,pi->p", x - poly.vertices[k], e) / poly.edge_lengths[k] ** 2
        return self.vertex_values[k] + s * self.density[k] * poly.edge_lengths[k]


def boundary_b(poly, A, origin=None, sigma=None, tol=1e-12):
    """Integrate db = sigma - tau counterclockwise from b(vertex 0) = 0.

    tau is the flux of the radial field (A/2)(x - origin) through each
    edge, i.e. density (A/2) * dist(origin, edge line) with sign.
    ``sigma`` overrides the polygon's densities (zeros allowed).
    """
    origin = poly.base_point if origin is None else np.asarray(origin, dtype=float)
    sig = poly.sigma if sigma is None else np.asarray(sigma, dtype=float)
    h = poly.signed_distances(origin)
    tau = 0.5 * A * h
    density = sig - tau
    steps = density * poly.edge_lengths
    values = np.concatenate([[0.0], np.cumsum(steps)])
    closure = float(values[-1])
    scale = max(1.0, float(np.sum(np.abs(steps))))
    if abs(closure) > tol * scale:
        raise ConsistencyError(
            f"b does not close up around the boundary (mismatch {closure:.3e}); "
            "A is inconsistent with sigma"
        )
    return BoundaryFunction(poly, _frozen(density), _frozen(values[:-1]), _frozen(origin), float(A), closure)


def clip_halfplane(vertices, a, c):
    """Part of a convex polygon where <a, x> + c >= 0 (Sutherland-Hodgman)."""
    v = np.asarray(vertices, dtype=float)
    g = v @ np.asarray(a, dtype=float) + c
    out = []
    n = len(v)
    for i in range(n):
        p, q = v[i], v[(i + 1) % n]
        gp, gq = g[i], g[(i + 1) % n]
        if gp >= 0:
            out.append(p)
        if (gp >= 0) != (gq >= 0):
            t = gp / (gp - gq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def polygon_area_centroid(vertices):
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0, np.zeros(2)
    w = np.roll(v, -1, axis=0)
    c = cross2(v, w)
    area = 0.5 * np.sum(c)
    if area == 0:
        return 0.0, v.mean(axis=0)
    return float(area), np.sum((v + w) * c[:, None], axis=0) / (6.0 * area)
