"""Quadrature rules graded toward the boundary of a convex polygon.

The potential's log-determinant and curvature densities grow like
negative powers (or logarithms) of the boundary distance, so cells are
refined geometrically (ratio 1/2) toward every edge and vertex.  Rules are
returned as (points, weights) so that integrands can be evaluated in one
vectorized batch.
"""

from __future__ import annotations

import numpy as np

DEFAULT_ORDER = 7
DEFAULT_LEVELS = 12


def gauss_legendre(order, a=0.0, b=1.0):
    x, w = np.polynomial.legendre.leggauss(order)
    return a + 0.5 * (b - a) * (x + 1.0), 0.5 * (b - a) * w


def graded_breaks(levels, toward_start=False, toward_end=True):
    """Breakpoints in [0, 1] halving toward the chosen ends."""
    if toward_start and toward_end:
        half = 0.5 * graded_breaks(levels, toward_start=True, toward_end=False)
        return np.concatenate([half, 1.0 - half[::-1][1:]])
    tail = 0.5 ** np.arange(1, levels + 1)
    if toward_end:
        return np.concatenate([[0.0], 1.0 - tail, [1.0]])
    return np.concatenate([[0.0], tail[::-1], [1.0]])


def composite_rule(breaks, order):
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        x, w = gauss_legendre(order, a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def fan_rule(poly, apex=None, order=DEFAULT_ORDER, levels=DEFAULT_LEVELS):
    """Area rule on the triangles (apex, v_k, v_{k+1}).

    Each triangle is parameterized by (s, tau) -> apex + s (P(tau) - apex)
    with P(tau) on edge k; s is graded toward the edge (s = 1) and tau
    toward both vertices.
    """
    apex = poly.base_point if apex is None else np.asarray(apex, dtype=float)
    s, ws = composite_rule(graded_breaks(levels), order)
    tau, wt = composite_rule(graded_breaks(levels, True, True), order)
    S, Tau = np.meshgrid(s, tau, indexing="ij")
    W = np.outer(ws * s, wt)
    pts, wts = [], []
    V = poly.vertices
    for k in range(poly.n_edges):
        p, q = V[k], V[(k + 1) % poly.n_edges]
        area2 = abs((p[0] - apex[0]) * (q[1] - apex[1]) - (p[1] - apex[1]) * (q[0] - apex[0]))
        edge = (1 - Tau)[..., None] * p + Tau[..., None] * q
        pts.append((apex + S[..., None] * (edge - apex)).reshape(-1, 2))
        wts.append((W * area2).ravel())
    return np.concatenate(pts), np.concatenate(wts)


def edge_rule(poly, order=DEFAULT_ORDER, levels=DEFAULT_LEVELS, weight_by_sigma=True):
    """Boundary rule graded toward the vertices.

    Returns (points, weights, edge_index); weights include sigma unless
    ``weight_by_sigma`` is False (then they are Euclidean arclength).
    """
    tau, wt = composite_rule(graded_breaks(levels, True, True), order)
    pts, wts, idx = [], [], []
    for k in range(poly.n_edges):
        pts.append(poly.edge_point(k, tau))
        scale = poly.edge_lengths[k] * (poly.sigma[k] if weight_by_sigma else 1.0)
        wts.append(wt * scale)
        idx.append(np.full(tau.size, k))
    return np.concatenate(pts), np.concatenate(wts), np.concatenate(idx)


def disc_rule(center, radius, n_theta=64, order=DEFAULT_ORDER, levels=8):
    """Polar rule on a disc, radially graded toward the center.

    Returns (points, weights, r, theta); the theta rule is the periodic
    trapezoid rule, exact for trigonometric polynomials of degree < n_theta.
    """
    r, wr = composite_rule(graded_breaks(levels, toward_start=True, toward_end=False), order)
    r, wr = radius * r, radius * wr
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, Th = np.meshgrid(r, th, indexing="ij")
    W = np.outer(wr * r, np.full(n_theta, 2 * np.pi / n_theta))
    pts = np.asarray(center, dtype=float) + np.stack([R * np.cos(Th), R * np.sin(Th)], axis=-1)
    return pts.reshape(-1, 2), W.ravel(), R.ravel(), Th.ravel()


def circle_rule(center, radius, n_theta=256):
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    pts = np.asarray(center, dtype=float) + radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    return pts, np.full(n_theta, 2 * np.pi * radius / n_theta), th


def integrate(fn, rule):
    """Sum fn(points) * weights in a fixed order."""
    pts, w = rule[0], rule[1]
    return float(np.dot(fn(pts), w))


def polygon_rule(vertices, order=DEFAULT_ORDER):
    """Ungraded rule on a convex polygon (fan from vertex 0, collapsed squares).

    Exact for polynomials of degree <= 2 * order - 2; intended for smooth
    integrands on pieces cut out by clipping.
    """
    v = np.asarray(vertices, dtype=float)
    x, w = gauss_legendre(order)
    S, Tau = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w * x, w)
    pts, wts = [], []
    for k in range(1, len(v) - 1):
        p, q = v[k], v[k + 1]
        area2 = abs((p[0] - v[0, 0]) * (q[1] - v[0, 1]) - (p[1] - v[0, 1]) * (q[0] - v[0, 0]))
        edge = (1 - Tau)[..., None] * p + Tau[..., None] * q
        pts.append((v[0] + S[..., None] * (edge - v[0])).reshape(-1, 2))
        wts.append((W * area2).ravel())
    if not pts:
        return np.zeros((0, 2)), np.zeros(0)
    return np.concatenate(pts), np.concatenate(wts)
