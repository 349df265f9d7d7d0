"""Sections S_x(t) = {y : H_x(y) <= t} of a convex potential and their
normalization by unimodular affine maps.

H_x(y) = u(y) - u(x) - <grad u(x), y - x> is convex in y and vanishes to
second order at x, so along each ray from x it increases monotonically and
the boundary radius is a unique root.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import curvature_tensors, hessian_package
from .ellipse import mvee
from .errors import InputError, NonCompactSectionError
from .polytope import ConvexRegion, cross2
from .potential import RescaledPotential

ALPHA2 = 2.0 ** -1.5
DEFAULT_RAYS = 128
ROUND_TOL = 1e-6


def h_distance(pot, x, y):
    """H_x(y); both points must be interior."""
    jx = pot.jet(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    uy = pot.jet(y).value
    return uy - jx.value - np.einsum("...i,...i->...", y - jx.location, jx.grad)


def _ray_values(pot, x, ux, gx, thetas, r):
    dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
    pts = x + r[:, None] * dirs
    return pot.value(pts) - ux - r * (dirs @ gx)


@dataclass
class Section:
    center: np.ndarray
    t: float
    thetas: np.ndarray
    radii: np.ndarray
    volume: float
    shoelace_area: float

    @property
    def boundary(self):
        return self.center + self.radii[:, None] * np.stack([np.cos(self.thetas), np.sin(self.thetas)], axis=-1)

    def is_convex(self, tol=1e-12):
        b = self.boundary
        e = np.roll(b, -1, axis=0) - b
        turn = cross2(e, np.roll(e, -1, axis=0))
        return bool(np.all(turn > -tol * np.max(self.radii) ** 2))

    def to_dict(self):
        return {"center": self.center.tolist(), "t": self.t, "volume": self.volume,
                "shoelace_area": self.shoelace_area, "radii": self.radii.tolist()}


def section_boundary(pot, x, t, nrays=DEFAULT_RAYS, iterations=80):
    """Radii of S_x(t) on ``nrays`` equally spaced rays by vectorized bisection.

    Raises NonCompactSectionError when the section reaches the boundary of
    the domain on some ray.
    """
    if not t > 0:
        raise InputError("section level must be positive", "positive_level")
    x = np.asarray(x, dtype=float)
    jx = pot.jet(x)
    thetas = 2 * np.pi * np.arange(nrays) / nrays
    dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
    hi = np.array([pot.exit_distance(x, d) for d in dirs], dtype=float)
    finite = np.isfinite(hi)
    if np.any(finite):
        edge_vals = _ray_values(pot, x, jx.value, jx.grad, thetas[finite], hi[finite])
        if np.any(edge_vals <= t):
            raise NonCompactSectionError(f"section at level {t} reaches the boundary; shrink t")
    if not np.all(finite):
        grow = ~finite
        hi[grow] = 1.0
        for _ in range(200):
            vals = _ray_values(pot, x, jx.value, jx.grad, thetas[grow], hi[grow])
            done = vals > t
            idx = np.flatnonzero(grow)
            grow[idx[done]] = False
            hi[grow] *= 2.0
            if not np.any(grow):
                break
    lo = np.zeros(nrays)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = _ray_values(pot, x, jx.value, jx.grad, thetas, mid) <= t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    r = 0.5 * (lo + hi)
    vol = float(np.pi / nrays * np.sum(r * r))
    b = x + r[:, None] * dirs
    shoe = 0.5 * float(np.sum(cross2(b, np.roll(b, -1, axis=0))))
    return Section(x, float(t), thetas, r, vol, shoe)


@dataclass
class NormalizationMap:
    T: np.ndarray
    k: float
    center: np.ndarray
    rho: float
    outer_radius: float
    inner_radius: float
    alpha_target: float = ALPHA2

    @property
    def inclusion_outer(self):
        return self.outer_radius <= 1.0 + 1e-9

    @property
    def inclusion_inner(self):
        return self.inner_radius >= self.alpha_target

    def apply(self, y):
        """Normalized coordinates T^{-1}(y - c) / rho."""
        return (np.asarray(y, dtype=float) - self.center) @ np.linalg.inv(self.T).T / self.rho

    def to_dict(self):
        return {"T": self.T.tolist(), "k": self.k, "center": self.center.tolist(), "rho": self.rho,
                "outer_radius": self.outer_radius, "inner_radius": self.inner_radius,
                "alpha_target": self.alpha_target}


def _polyline_distance(origin, poly):
    """Distance from ``origin`` to a closed polyline."""
    p = poly
    q = np.roll(poly, -1, axis=0)
    d = q - p
    s = np.clip(np.einsum("ni,ni->n", origin - p, d) / np.einsum("ni,ni->n", d, d), 0.0, 1.0)
    return float(np.min(np.linalg.norm(p + s[:, None] * d - origin, axis=1)))


def normalize_section(section, tol=1e-9):
    """Unimodular T and scale k from the minimum-area enclosing ellipse."""
    ell = mvee(section.boundary, tol=tol)
    axes, V = ell.axes()
    order = np.argsort(-axes)
    axes, V = axes[order], V[:, order]
    if axes[0] - axes[1] <= ROUND_TOL * axes[0]:
        # a round section has no preferred axes; take the identity
        V = np.eye(2)
    if V[0, 0] < 0:
        V[:, 0] = -V[:, 0]
    if np.linalg.det(V) < 0:
        V[:, 1] = -V[:, 1]
    rho = float(np.sqrt(axes[0] * axes[1]))
    T = V @ np.diag(axes / rho)
    nm = NormalizationMap(T, float(np.sqrt(section.t) / rho), ell.center, rho, 0.0, 0.0)
    img = nm.apply(section.boundary)
    nm.outer_radius = float(np.max(np.linalg.norm(img, axis=1)))
    nm.inner_radius = _polyline_distance(np.zeros(2), img)
    return nm


def k2_window(c1, c2):
    """The interval [pi/(8 c2), pi/c1] that k^2 must lie in."""
    return np.pi / (8 * c2), np.pi / c1


def rescale_potential(pot, t, T, center=None):
    return RescaledPotential(pot, float(t), np.asarray(T, dtype=float), center)


@dataclass
class ScalingCheck:
    det_rel: float
    F_rel: float
    G_rel: float
    v_rel: float

    @property
    def worst(self):
        return max(self.det_rel, self.F_rel, self.G_rel, self.v_rel)


def scaling_check(pot, t, T, points, center=None):
    """Compare det, |F|, |G|, v of u* at points with those of u at the images."""
    res = rescale_potential(pot, t, T, center)
    xs = np.atleast_2d(points)
    ys = res.to_base(xs)
    s0 = hessian_package(pot.jet(ys))
    s1 = hessian_package(res.jet(xs))
    c0, c1 = curvature_tensors(s0), curvature_tensors(s1)
    v_expected = np.sqrt(t) * s0.v @ np.linalg.inv(res.T).T
    return ScalingCheck(
        _rel_error(s1.det_hess, s0.det_hess),
        _rel_error(np.sqrt(np.abs(c1.normF2)), t * np.sqrt(np.abs(c0.normF2))),
        _rel_error(np.sqrt(np.abs(c1.normG2)), t * np.sqrt(np.abs(c0.normG2))),
        _rel_error(s1.v, v_expected),
    )


def _rel_error(a, b):
    """max |a - b| relative to max |b|; absolute when b vanishes identically."""
    scale = float(np.max(np.abs(b)))
    err = float(np.max(np.abs(np.asarray(a) - b)))
    return err / scale if scale > 0 else err


def modulus(pot, K, Kplus, per_edge=32, grid=9):
    """H(K, K+) = min over x in K of min over y on the boundary of K+ of H_x(y).

    ``K`` is a ConvexRegion or an array of sample points; ``Kplus`` is a
    ConvexRegion.  Returns (value, number of K samples, number of boundary
    samples).
    """
    if isinstance(K, ConvexRegion):
        (x0, y0), (x1, y1) = K.bounding_box
        g = np.stack(np.meshgrid(np.linspace(x0, x1, grid), np.linspace(y0, y1, grid), indexing="ij"), -1).reshape(-1, 2)
        inside = g[K.distance(g) >= -1e-12 * K.diameter]
        ks = np.concatenate([K.vertices, inside])
    else:
        ks = np.atleast_2d(np.asarray(K, dtype=float))
    if np.any(Kplus.distance(ks) <= 0):
        raise InputError("K must lie strictly inside K+", "containment")
    if pot.domain is not None and np.any(pot.distance(Kplus.vertices) <= 0):
        raise InputError("K+ must lie strictly inside the domain", "containment")
    s = np.arange(per_edge) / per_edge
    ys = np.concatenate([Kplus.edge_point(k, s) for k in range(Kplus.n_edges)])
    jx = pot.jet(ks)
    uy = pot.jet(ys).value
    H = (uy[None, :] - jx.value[:, None]
         - np.einsum("pyi,pi->py", ys[None, :, :] - ks[:, None, :], jx.grad))
    return float(H.min()), len(ks), len(ys)


@dataclass
class SectionStats:
    levels: list
    volume_ratios: list
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    k: list = field(default_factory=list)
    k2_windows: list = field(default_factory=list)
    inner_radii: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("levels", "volume_ratios", "c1", "c2", "c3", "c4", "c5", "k", "k2_windows",
                 "inner_radii", "skipped")}


def _sample_inside(section, every=8, fractions=(0.0, 0.35, 0.7, 1.0)):
    b = section.boundary[::every] - section.center
    pts = [section.center + f * b for f in fractions[1:]]
    return np.concatenate([section.center[None, :], *pts])


def section_stats(pot, x, levels, nrays=DEFAULT_RAYS):
    """Measured counterparts of the section-geometry constants.

    c1, c2: min / max of Vol(S(t))/t; c3: distance from the boundary of
    S(t/2) to that of S(t) in normalized coordinates; c4: max of H_y(z)/t
    over sampled y, z in S(t); c5: radius of the ball about x inside the
    normalized S(t/2).  Constants are minimized (c3, c5) or maximized (c4)
    over the levels.
    """
    x = np.asarray(x, dtype=float)
    used, ratios, ks, windows, inner, skipped = [], [], [], [], [], []
    c3 = c5 = np.inf
    c4 = 0.0
    for t in levels:
        try:
            full = section_boundary(pot, x, t, nrays)
            half = section_boundary(pot, x, t / 2, nrays)
        except NonCompactSectionError:
            skipped.append(float(t))
            continue
        used.append(float(t))
        ratios.append(full.volume / t)
        nm = normalize_section(full)
        ks.append(nm.k)
        inner.append(nm.inner_radius)
        a = nm.apply(full.boundary)
        hb = nm.apply(half.boundary)
        c3 = min(c3, min(_polyline_distance(p, a) for p in hb))
        c5 = min(c5, _polyline_distance(nm.apply(x), hb))
        samples = _sample_inside(full)
        jy = pot.jet(samples)
        H = (jy.value[None, :] - jy.value[:, None]
             - np.einsum("yzi,yi->yz", samples[None, :, :] - samples[:, None, :], jy.grad))
        c4 = max(c4, float(H.max()) / t)
    if not used:
        raise NonCompactSectionError("no level gave a compact section")
    c1, c2 = float(min(ratios)), float(max(ratios))
    windows = [list(k2_window(c1, c2)) for _ in used]
    return SectionStats(used, ratios, c1, c2, float(c3), c4, float(c5), ks, windows, inner, skipped)
