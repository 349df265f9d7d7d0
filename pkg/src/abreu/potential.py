"""Symplectic potentials u = u0 + f and their 4-jets.

u0 = sum_k l_k log l_k is built from the adapted defining functions of the
polygon edges; f is a tensor-product Bernstein polynomial on the bounding
box plus an affine shift used for normalization.  All derivatives through
order four are closed form, and every evaluator is vectorized over a
leading batch of points.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import xlogy

from .errors import ConvexityError, DomainError, SingularPointError
from .polytope import ConvexRegion, Polygon, defining_functions

DEFAULT_DEGREE = 6

# Entry of a symmetric 2-tensor of order k depends only on how many
# indices equal 1, so packed storage keeps k + 1 numbers.
_IDX3 = np.indices((2, 2, 2)).sum(axis=0)
_IDX4 = np.indices((2, 2, 2, 2)).sum(axis=0)
_PACK3 = (np.array([0, 0, 0, 1]), np.array([0, 0, 1, 1]), np.array([0, 1, 1, 1]))
_PACK4 = (np.array([0, 0, 0, 0, 1]), np.array([0, 0, 0, 1, 1]),
          np.array([0, 0, 1, 1, 1]), np.array([0, 1, 1, 1, 1]))


@dataclass(frozen=True)
class Jet4:
    """Value and derivatives through order 4, batched over leading axes.

    ``third`` holds (u_xxx, u_xxy, u_xyy, u_yyy) and ``fourth`` holds
    (u_xxxx, ..., u_yyyy); :attr:`d3` and :attr:`d4` expand them.
    """

    location: np.ndarray
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray
    fourth: np.ndarray

    @property
    def d3(self):
        return self.third[..., _IDX3]

    @property
    def d4(self):
        return self.fourth[..., _IDX4]

    @property
    def shape(self):
        return np.shape(self.value)

    def __add__(self, other):
        return Jet4(self.location, self.value + other.value, self.grad + other.grad,
                    self.hess + other.hess, self.third + other.third, self.fourth + other.fourth)

    def __mul__(self, c):
        return Jet4(self.location, c * self.value, c * self.grad, c * self.hess,
                    c * self.third, c * self.fourth)

    __rmul__ = __mul__

    def __getitem__(self, idx):
        return Jet4(self.location[idx], self.value[idx], self.grad[idx], self.hess[idx],
                    self.third[idx], self.fourth[idx])

    @classmethod
    def from_full(cls, location, value, grad, hess, d3, d4):
        d3 = np.asarray(d3)
        d4 = np.asarray(d4)
        return cls(np.asarray(location, dtype=float), np.asarray(value, dtype=float),
                   np.asarray(grad, dtype=float), np.asarray(hess, dtype=float),
                   d3[(...,) + _PACK3], d4[(...,) + _PACK4])

    def with_affine(self, c, g):
        """Jet of u + c + <g, x>; derivatives of order >= 2 are shared."""
        g = np.asarray(g, dtype=float)
        return Jet4(self.location, self.value + c + self.location @ g, self.grad + g,
                    self.hess, self.third, self.fourth)


def quadratic_jet(x, Q=None, center=None):
    """Jet of 0.5 (x-c)^T Q (x-c) at points ``x``."""
    x = np.asarray(x, dtype=float)
    Q = np.eye(2) if Q is None else np.asarray(Q, dtype=float)
    c = np.zeros(2) if center is None else np.asarray(center, dtype=float)
    y = x - c
    batch = x.shape[:-1]
    return Jet4(x, 0.5 * np.einsum("...i,ij,...j->...", y, Q, y), y @ Q.T,
                np.broadcast_to(Q, batch + (2, 2)).copy(),
                np.zeros(batch + (4,)), np.zeros(batch + (5,)))


class Potential:
    """Common interface: jets in the interior, values up to the boundary.

    Subclasses set ``domain`` (a ConvexRegion, or None for the whole plane)
    and implement ``_jet`` and ``_value``.
    """

    domain = None

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        if self.domain is None:
            return np.full(x.shape[:-1], np.inf)
        return self.domain.distance(x)

    def exit_distance(self, x, direction):
        if self.domain is None:
            return np.inf
        return self.domain.exit_distance(x, direction)

    def contains(self, x, margin=0.0):
        return self.distance(x) > margin

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        if self.domain is not None:
            d = self.distance(x)
            if np.any(d <= 0):
                bad = np.asarray(x).reshape(-1, 2)[int(np.argmin(np.ravel(d)))]
                raise SingularPointError(f"jet requested at non-interior point {bad.tolist()}")
        return self._jet(x)

    def value(self, x):
        """u at points of the closed domain (continuous extension)."""
        x = np.asarray(x, dtype=float)
        if self.domain is not None:
            d = self.distance(x)
            if np.any(d < -1e-12 * max(1.0, self.domain.diameter)):
                raise DomainError("value requested outside the domain")
        return self._value(x)

    def grad(self, x):
        return self.jet(x).grad


@dataclass(frozen=True, eq=False)
class QuadraticPotential(Potential):
    """0.5 (x-c)^T Q (x-c) on the plane or on an optional convex region."""

    Q: np.ndarray = None
    center: np.ndarray = None
    domain: ConvexRegion = None

    def __post_init__(self):
        object.__setattr__(self, "Q", np.eye(2) if self.Q is None else np.asarray(self.Q, dtype=float))
        object.__setattr__(self, "center", np.zeros(2) if self.center is None
                           else np.asarray(self.center, dtype=float))

    def _jet(self, x):
        return quadratic_jet(x, self.Q, self.center)

    def _value(self, x):
        y = x - self.center
        return 0.5 * np.einsum("...i,ij,...j->...", y, self.Q, y)


# -- Bernstein correction -------------------------------------------------


def bernstein_power_matrix(m):
    """C[i, k] with B_i^m(s) = sum_k C[i, k] s^k."""
    C = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        for j in range(m - i + 1):
            C[i, i + j] = comb(m, i) * comb(m - i, j) * (-1) ** j
    return C


def bernstein_derivatives(s, m, width, order=4):
    """Array (order+1, P, m+1): r-th x-derivative of B_i^m((x - x0)/width)."""
    s = np.asarray(s, dtype=float).ravel()
    C = bernstein_power_matrix(m)
    k = np.arange(m + 1)
    out = np.zeros((order + 1, s.size, m + 1))
    for r in range(order + 1):
        fall = np.ones(m + 1)
        for q in range(r):
            fall = fall * (k - q)
        powers = np.where(k >= r, k - r, 0)
        V = np.where(k >= r, fall, 0.0) * s[:, None] ** powers
        out[r] = V @ C.T / width ** r
    return out


def affine_coefficient_basis(m):
    """Bernstein coefficient arrays of 1, s and t on the box."""
    i = np.arange(m + 1) / m if m > 0 else np.zeros(1)
    one = np.ones((m + 1, m + 1))
    return np.stack([one, np.broadcast_to(i[:, None], one.shape), np.broadcast_to(i[None, :], one.shape)])


def affine_free_basis(m):
    """Orthonormal basis (columns) of coefficient space modulo affine functions."""
    A = affine_coefficient_basis(m).reshape(3, -1).T
    q, _ = np.linalg.qr(A, mode="complete")
    return q[:, 3:]


def project_affine_free(coefficients):
    c = np.asarray(coefficients, dtype=float)
    m = c.shape[0] - 1
    A = affine_coefficient_basis(m).reshape(3, -1).T
    q, _ = np.linalg.qr(A)
    flat = c.ravel()
    return (flat - q @ (q.T @ flat)).reshape(c.shape)


def power_to_bernstein(power, box):
    """Bernstein coefficients (on ``box``) of sum_{a,b} power[a, b] x^a y^b."""
    power = np.asarray(power, dtype=float)
    (x0, y0), (x1, y1) = box
    m = max(power.shape) - 1
    P = np.zeros((m + 1, m + 1))
    P[: power.shape[0], : power.shape[1]] = power
    # substitute x = x0 + wx s, y = y0 + wy t, collecting s^a t^b
    wx, wy = x1 - x0, y1 - y0
    Sx = _affine_substitution(m, x0, wx)
    Sy = _affine_substitution(m, y0, wy)
    st = Sx.T @ P @ Sy
    # s^k = sum_{i >= k} comb(i, k) / comb(m, k) B_i^m(s)
    E = np.zeros((m + 1, m + 1))
    for k in range(m + 1):
        for i in range(k, m + 1):
            E[k, i] = comb(i, k) / comb(m, k)
    return E.T @ st @ E


def _affine_substitution(m, a, w):
    # row p: coefficients in s of (a + w s)^p
    S = np.zeros((m + 1, m + 1))
    for p in range(m + 1):
        for k in range(p + 1):
            S[p, k] = comb(p, k) * a ** (p - k) * w ** k
    return S


def _raise_degree(c, m):
    # degree elevation of a tensor Bernstein array to degree m in each variable
    while c.shape[0] - 1 < m:
        n = c.shape[0] - 1
        E = np.zeros((n + 2, n + 1))
        for i in range(n + 2):
            if i <= n:
                E[i, i] += 1 - i / (n + 1)
            if i >= 1:
                E[i, i - 1] += i / (n + 1)
        c = E @ c @ E.T
    return c


@dataclass(frozen=True, eq=False)
class SymplecticPotential(Potential):
    """u = sum_k l_k log l_k + Bernstein(coefficients) + c + <g, x>."""

    polygon: Polygon
    coefficients: np.ndarray
    affine_shift: np.ndarray = None

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficients must be a square (m+1) x (m+1) array")
        c.setflags(write=False)
        shift = np.zeros(3) if self.affine_shift is None else np.array(self.affine_shift, dtype=float)
        shift.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "affine_shift", shift)
        frames = defining_functions(self.polygon)
        object.__setattr__(self, "_a", np.array([f.gradient for f in frames]))
        object.__setattr__(self, "_b", np.array([-f.offset / f.sigma for f in frames]))

    @property
    def domain(self):
        return self.polygon

    @property
    def degree(self):
        return self.coefficients.shape[0] - 1

    def replace(self, coefficients=None, affine_shift=None):
        return SymplecticPotential(
            self.polygon,
            self.coefficients if coefficients is None else coefficients,
            self.affine_shift if affine_shift is None else affine_shift,
        )

    def with_polynomial(self, power, scale=1.0):
        """Add scale * sum power[a, b] x^a y^b to the correction."""
        extra = power_to_bernstein(power, self.polygon.bounding_box)
        m = max(self.degree, extra.shape[0] - 1)
        c = _raise_degree(self.coefficients, m) + scale * _raise_degree(extra, m)
        return self.replace(coefficients=c)

    def defining_values(self, x):
        return np.asarray(x, dtype=float) @ self._a.T + self._b

    def _value(self, x):
        ell = np.maximum(self.defining_values(x), 0.0)
        out = np.sum(xlogy(ell, ell), axis=-1)
        out = out + self._correction_value(x)
        c, g = self.affine_shift[0], self.affine_shift[1:]
        return out + c + x @ g

    def _correction_value(self, x):
        if not np.any(self.coefficients):
            return np.zeros(np.shape(x)[:-1])
        Bx, By = self._basis(x, order=0)
        return np.einsum("pi,ij,pj->p", Bx[0], self.coefficients, By[0]).reshape(np.shape(x)[:-1])

    def _basis(self, x, order):
        (x0, y0), (x1, y1) = self.polygon.bounding_box
        flat = np.reshape(x, (-1, 2))
        m = self.degree
        Bx = bernstein_derivatives((flat[:, 0] - x0) / (x1 - x0), m, x1 - x0, order)
        By = bernstein_derivatives((flat[:, 1] - y0) / (y1 - y0), m, y1 - y0, order)
        return Bx, By

    def canonical_jet(self, x):
        """Jet of u0 alone."""
        x = np.asarray(x, dtype=float)
        ell = self.defining_values(x)
        a = self._a
        ax, ay = a[:, 0], a[:, 1]
        inv = 1.0 / ell
        value = np.sum(xlogy(ell, ell), axis=-1)
        grad = (np.log(ell) + 1.0) @ a
        hess = np.einsum("...k,ki,kj->...ij", inv, a, a)
        third = np.stack([(-inv ** 2) @ (ax ** (3 - q) * ay ** q) for q in range(4)], axis=-1)
        fourth = np.stack([(2 * inv ** 3) @ (ax ** (4 - q) * ay ** q) for q in range(5)], axis=-1)
        return Jet4(x, value, grad, hess, third, fourth)

    def correction_jet(self, x, coefficients=None):
        """Jet of the Bernstein part (no affine shift)."""
        x = np.asarray(x, dtype=float)
        c = self.coefficients if coefficients is None else coefficients
        batch = x.shape[:-1]
        Bx, By = self._basis(x, order=4)

        def d(p, q):
            return np.einsum("pi,ij,pj->p", Bx[p], c, By[q]).reshape(batch)

        value = d(0, 0)
        grad = np.stack([d(1, 0), d(0, 1)], axis=-1)
        hxx, hxy, hyy = d(2, 0), d(1, 1), d(0, 2)
        hess = np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)
        third = np.stack([d(3 - q, q) for q in range(4)], axis=-1)
        fourth = np.stack([d(4 - q, q) for q in range(5)], axis=-1)
        return Jet4(x, value, grad, hess, third, fourth)

    def _jet(self, x):
        jet = self.canonical_jet(x)
        if np.any(self.coefficients):
            jet = jet + self.correction_jet(x)
        return jet.with_affine(self.affine_shift[0], self.affine_shift[1:])


@dataclass(frozen=True, eq=False)
class RescaledPotential(Potential):
    """u*(x) = u(center + sqrt(t) T x) / t for a unimodular T."""

    base: Potential
    t: float
    T: np.ndarray
    center: np.ndarray = None

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        if abs(np.linalg.det(T) - 1.0) > 1e-12:
            raise ValueError("T must be unimodular")
        if self.t <= 0:
            raise ValueError("t must be positive")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "center", np.zeros(2) if self.center is None
                           else np.asarray(self.center, dtype=float))
        object.__setattr__(self, "_M", np.sqrt(self.t) * T)
        dom = None
        if self.base.domain is not None:
            Minv = np.linalg.inv(self._M)
            dom = self.base.domain.mapped(Minv, -Minv @ self.center)
        object.__setattr__(self, "_domain", dom)

    @property
    def domain(self):
        return self._domain

    def to_base(self, x):
        return self.center + np.asarray(x, dtype=float) @ self._M.T

    def from_base(self, y):
        return (np.asarray(y, dtype=float) - self.center) @ np.linalg.inv(self._M).T

    def _value(self, x):
        return self.base.value(self.to_base(x)) / self.t

    def _jet(self, x):
        x = np.asarray(x, dtype=float)
        j = self.base.jet(self.to_base(x))
        M, t = self._M, self.t
        grad = j.grad @ M / t
        hess = np.einsum("...ab,ai,bj->...ij", j.hess, M, M) / t
        d3 = np.einsum("...abc,ai,bj,ck->...ijk", j.d3, M, M, M) / t
        d4 = np.einsum("...abcd,ai,bj,ck,dl->...ijkl", j.d4, M, M, M, M) / t
        return Jet4.from_full(x, j.value / t, grad, hess, d3, d4)


# -- operations ------------------------------------------------------------


def canonical_potential(poly, degree=DEFAULT_DEGREE):
    return SymplecticPotential(poly, np.zeros((degree + 1, degree + 1)))


def eval_jet(pot, x):
    return pot.jet(x)


def normalize(pot, base_point=None):
    """Choose the affine shift so u and grad u vanish at the base point."""
    x0 = pot.polygon.base_point if base_point is None else np.asarray(base_point, dtype=float)
    raw = pot.replace(affine_shift=np.zeros(3)).jet(x0)
    g = -raw.grad
    c = -raw.value - x0 @ g
    return pot.replace(affine_shift=np.array([c, g[0], g[1]]))


def legendre_map(pot, x):
    return pot.jet(x).grad


def inverse_legendre(pot, xi, x_start, tol=1e-13, max_iter=100):
    """Solve grad u(x) = xi by damped Newton from ``x_start``."""
    x = np.array(x_start, dtype=float)
    xi = np.asarray(xi, dtype=float)
    for _ in range(max_iter):
        j = pot.jet(x)
        r = j.grad - xi
        if np.linalg.norm(r) <= tol * max(1.0, np.linalg.norm(xi)):
            return x
        step = -np.linalg.solve(j.hess, r)
        lam = 1.0
        while not pot.contains(x + lam * step) and lam > 1e-12:
            lam *= 0.5
        x = x + lam * step
    raise ConvexityError("inverse gradient map did not converge", location=x.tolist())


@dataclass(frozen=True)
class ConvexityReport:
    min_eigenvalue: float
    argmin: np.ndarray
    failing_points: np.ndarray
    n_points: int

    @property
    def convex(self):
        return self.min_eigenvalue > 0


def interior_grid(domain, n, d_min):
    """n x n grid over the bounding box, kept where distance >= d_min.

    Rows come out in lexicographic (x, y) order.
    """
    (x0, y0), (x1, y1) = domain.bounding_box
    xs = x0 + (x1 - x0) * (np.arange(n) + 0.5) / n
    ys = y0 + (y1 - y0) * (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    return pts[domain.distance(pts) >= d_min]


def convexity_audit(pot, n=41, d_min=None, points=None):
    if points is None:
        if d_min is None:
            d_min = 1e-3 * pot.domain.diameter
        points = interior_grid(pot.domain, n, d_min)
    h = pot.jet(points).hess
    eig = np.linalg.eigvalsh(h)[:, 0]
    k = int(np.argmin(eig))
    return ConvexityReport(float(eig[k]), points[k], points[eig <= 0], len(points))

