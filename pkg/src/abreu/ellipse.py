"""Minimum-area enclosing ellipse (Khachiyan iteration with away steps).

The ellipse is {x : (x - c)^T M (x - c) <= 1}.  The Todd-Yildirim away
steps shrink weights on points that have dropped off the boundary, which
gives linear convergence in practice and lets the iteration reach tight
tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ConditioningError


@dataclass(frozen=True)
class Ellipse:
    center: np.ndarray
    M: np.ndarray
    iterations: int = 0

    @property
    def area(self):
        return float(np.pi / np.sqrt(np.linalg.det(self.M)))

    def axes(self):
        """(semi-axis lengths descending, rotation with matching columns)."""
        lam, V = np.linalg.eigh(self.M)
        return 1.0 / np.sqrt(lam), V

    def level(self, x):
        y = np.asarray(x, dtype=float) - self.center
        return np.einsum("...i,ij,...j->...", y, self.M, y)


def mvee(points, tol=1e-9, max_iter=200000):
    """Minimum-area ellipse containing ``points`` (rows)."""
    P = np.asarray(points, dtype=float)
    n, d = P.shape
    if n < d + 1:
        raise ConditioningError("need at least three points for an enclosing ellipse")
    spread = P - P.mean(axis=0)
    sv = np.linalg.svd(spread, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1e-300):
        raise ConditioningError("points are (nearly) collinear; the ellipse degenerates")
    try:
        # the ellipse depends only on the hull vertices
        P = P[ConvexHull(P).vertices]
        n = len(P)
    except QhullError:
        pass
    Q = np.vstack([P.T, np.ones(n)])
    u = np.full(n, 1.0 / n)
    D = d + 1
    it = 0
    for it in range(1, max_iter + 1):
        if it % 200 == 1:
            # exact refresh; rank-one updates below drift slowly
            Xinv = np.linalg.inv((Q * u) @ Q.T)
            m = np.einsum("in,ij,jn->n", Q, Xinv, Q)
        j = int(np.argmax(m))
        masked = np.where(u > 0, m, np.inf)
        k = int(np.argmin(masked))
        up = m[j] - D
        down = D - m[k]
        if up <= tol * D and down <= tol * D:
            break
        if up >= down:
            i, step = j, up / (D * (m[j] - 1))
            alpha, beta = 1 - step, step
            u *= alpha
            u[j] += step
        else:
            drop = u[k] / (1 - u[k])
            # for m_k <= 1 the unconstrained away step is unbounded: drop the point
            step = min(down / (D * (m[k] - 1)), drop) if m[k] > 1 else drop
            i, alpha, beta = k, 1 + step, -step
            u *= alpha
            u[k] = max(u[k] - step, 0.0)
        g = Xinv @ Q[:, i]
        h = g @ Q
        r = beta / alpha
        denom = 1 + r * m[i]
        Xinv = (Xinv - r * np.outer(g, g) / denom) / alpha
        m = (m - r * h * h / denom) / alpha
    c = P.T @ u
    S = (P.T * u) @ P - np.outer(c, c)
    M = np.linalg.inv(S) / d
    # exact containment despite the finite tolerance
    M = M / max(1.0, float(np.max(np.einsum("ni,ij,nj->n", P - c, M, P - c))))
    return Ellipse(c, M, it)
