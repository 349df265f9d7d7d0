"""Pointwise tensor calculus of the Hessian of u.

Every function works on batches: a :class:`Jet4` whose arrays carry any
number of leading point axes produces a :class:`PointState` with the same
leading axes.  Index conventions (trailing axes):

    hess_inv_d1[j, k, i]    = d_i u^{jk}
    hess_inv_d2[j, k, i, l] = d_i d_l u^{jk}
    F_mixed[a, b, k, l]     = F^{ab}_{kl} = -d_k d_l u^{ab}
    G_mixed[i, k]           = G^i_k = F^{ij}_{kj}

Contractions are written out with ``einsum`` so every index sum is explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvexityError
from .potential import Jet4

_EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])  # epsilon^{12} = 1


@dataclass(frozen=True)
class PointState:
    jet: Jet4
    hess_inv: np.ndarray
    cofactor: np.ndarray
    det_hess: np.ndarray
    L: np.ndarray
    det_inv: np.ndarray
    hess_inv_d1: np.ndarray
    hess_inv_d2: np.ndarray
    v: np.ndarray
    S: np.ndarray

    @property
    def L_grad(self):
        """L_i = u^{ab} u_{abi}."""
        return np.einsum("...ab,...abi->...i", self.hess_inv, self.jet.d3)

    @property
    def L_hess(self):
        """L_ij = d_j (u^{ab} u_{abi})."""
        return (np.einsum("...abj,...abi->...ij", self.hess_inv_d1, self.jet.d3)
                + np.einsum("...ab,...abij->...ij", self.hess_inv, self.jet.d4))


@dataclass(frozen=True)
class CurvaturePack:
    F_mixed: np.ndarray
    F_lower: np.ndarray
    G_mixed: np.ndarray
    normF2: np.ndarray
    normG2: np.ndarray
    S: np.ndarray


def hessian_package(jet):
    """Invert the Hessian and differentiate the inverse twice."""
    H = jet.hess
    det = H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0]
    bad = ~((det > 0) & (H[..., 0, 0] > 0))
    if np.any(bad):
        loc = np.asarray(jet.location)[bad] if np.ndim(det) else jet.location
        raise ConvexityError("Hessian is not positive definite",
                             location=np.reshape(loc, (-1, 2))[0].tolist())
    cof = np.stack([np.stack([H[..., 1, 1], -H[..., 0, 1]], -1),
                    np.stack([-H[..., 1, 0], H[..., 0, 0]], -1)], -2)
    P = cof / det[..., None, None]
    T, Q = jet.d3, jet.d4
    d1 = -np.einsum("...ja,...abi,...bk->...jki", P, T, P)
    d2 = -(np.einsum("...jal,...abi,...bk->...jkil", d1, T, P)
           + np.einsum("...ja,...abil,...bk->...jkil", P, Q, P)
           + np.einsum("...ja,...abi,...bkl->...jkil", P, T, d1))
    v = -np.einsum("...iji->...j", d1)
    S = -np.einsum("...ijij->...", d2)
    return PointState(jet, P, cof, det, np.log(det), 1.0 / det, d1, d2, v, S)


def abreu_S_forms(state):
    """Return (S1, S4, S5, max pairwise deviation) from independent formulas.

    S1 = -d_i d_j u^{ij}; S4 = u^{ij}(L_ij - L_i L_j); S5 = -U^{ij} d_i d_j(1/det),
    the last built from derivatives of det taken directly from the jet.
    """
    S1 = state.S
    Li = state.L_grad
    S4 = np.einsum("...ij,...ij->...", state.hess_inv,
                   state.L_hess - Li[..., :, None] * Li[..., None, :])
    j = state.jet
    H, T, Q = j.hess, j.d3, j.d4
    h11, h22, h12 = H[..., 0, 0], H[..., 1, 1], H[..., 0, 1]
    det = h11 * h22 - h12 * h12
    Di = T[..., 0, 0, :] * h22[..., None] + h11[..., None] * T[..., 1, 1, :] - 2 * h12[..., None] * T[..., 0, 1, :]
    Dij = (Q[..., 0, 0, :, :] * h22[..., None, None] + h11[..., None, None] * Q[..., 1, 1, :, :]
           - 2 * h12[..., None, None] * Q[..., 0, 1, :, :]
           + T[..., 0, 0, :, None] * T[..., 1, 1, None, :] + T[..., 1, 1, :, None] * T[..., 0, 0, None, :]
           - 2 * T[..., 0, 1, :, None] * T[..., 0, 1, None, :])
    Fij = -Dij / det[..., None, None] ** 2 + 2 * Di[..., :, None] * Di[..., None, :] / det[..., None, None] ** 3
    S5 = -np.einsum("...ij,...ij->...", state.cofactor, Fij)
    dev = np.maximum(np.maximum(abs(S1 - S4), abs(S1 - S5)), abs(S4 - S5))
    return S1, S4, S5, dev


def relative_deviation(S1, S4, S5):
    scale = np.maximum(np.maximum(abs(S1), abs(S4)), np.maximum(abs(S5), 1.0))
    dev = np.maximum(np.maximum(abs(S1 - S4), abs(S1 - S5)), abs(S4 - S5))
    return dev / scale


@dataclass(frozen=True)
class VectorFields:
    v: np.ndarray
    w: np.ndarray
    h: np.ndarray
    h_grad_residual: np.ndarray


def vector_fields(state, A, origin):
    """w = v - (A/2)(x - origin), h = u - <grad u, x - origin> and the
    residual of the algebraic identity u^{ij} h_i = -(x - origin)^j."""
    j = state.jet
    y = np.asarray(j.location, dtype=float) - np.asarray(origin, dtype=float)
    w = state.v - 0.5 * A * y
    h = j.value - np.einsum("...i,...i->...", j.grad, y)
    h_grad = -np.einsum("...ik,...k->...i", j.hess, y)
    res = np.einsum("...ij,...i->...j", state.hess_inv, h_grad) + y
    return VectorFields(state.v, w, h, np.linalg.norm(res, axis=-1))


def curvature_tensors(state):
    Fm = -state.hess_inv_d2
    H = state.jet.hess
    Fl = np.einsum("...ia,...jb,...abkl->...ijkl", H, H, Fm)
    G = np.einsum("...ijkj->...ik", Fm)
    nF = np.einsum("...ijkl,...klij->...", Fm, Fm)
    nG = np.einsum("...ij,...ji->...", G, G)
    return CurvaturePack(Fm, Fl, G, nF, nG, np.einsum("...ii->...", G))


def lowered_F_direct(jet, hess_inv):
    """F_ijkl = u_ijkl - u^{pq}(u_kjq u_ilp + u_ikp u_jlq), from jets only."""
    T = jet.d3
    return jet.d4 - (np.einsum("...pq,...kjq,...ilp->...ijkl", hess_inv, T, T)
                     + np.einsum("...pq,...ikp,...jlq->...ijkl", hess_inv, T, T))


def guillemin_metric(state):
    """Block diagonal metric diag(u_ij, u^ij) on (x, eta)."""
    batch = state.det_hess.shape
    g = np.zeros(batch + (4, 4))
    g[..., :2, :2] = state.jet.hess
    g[..., 2:, 2:] = state.hess_inv
    return g


def variation_E(state, eps_jet):
    """E^{ij} = -u^{ia} eps_ab u^{bj} and its derivative E^{ij}_k."""
    P, d1 = state.hess_inv, state.hess_inv_d1
    e2, e3 = eps_jet.hess, eps_jet.d3
    E = -np.einsum("...ia,...ab,...bj->...ij", P, e2, P)
    Ek = -(np.einsum("...iak,...ab,...bj->...ijk", d1, e2, P)
           + np.einsum("...ia,...abk,...bj->...ijk", P, e3, P)
           + np.einsum("...ia,...ab,...bjk->...ijk", P, e2, d1))
    return E, Ek


def variation_ZW(state, eps_jet, pack=None):
    """Z^i = -E^{jl}_k F^{ik}_{jl} + E^{ij}_k G^k_j and
    W^i = -E^{jk}_j G^i_k + S E^{ji}_j."""
    pack = curvature_tensors(state) if pack is None else pack
    _, Ek = variation_E(state, eps_jet)
    Z = (-np.einsum("...jlk,...ikjl->...i", Ek, pack.F_mixed)
         + np.einsum("...ijk,...kj->...i", Ek, pack.G_mixed))
    W = (-np.einsum("...jkj,...ik->...i", Ek, pack.G_mixed)
         + pack.S[..., None] * np.einsum("...jij->...i", Ek))
    return Z, W


def epsilon():
    """The antisymmetric symbol with epsilon^{12} = 1."""
    return _EPS.copy()
