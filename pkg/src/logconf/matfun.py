"""Spectral evaluation of matrix functions and their directional derivatives.

Every operator here is a double (or triple) sum over eigenpairs,
``sum_ij w(l_i, l_j) P_i X P_j``.  With ``P_i = v_i v_i^T`` that sum is
``V (W o V^T X V) V^T``, which is how it is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, KernelOverflow, NonFinite
from .kernels import (
    DEFAULT_THRESHOLDS,
    KernelThresholds,
    dd_exp,
    divided_diff,
    f_eval,
    three_eig_factor,
)
from .tensor import _eigenbasis, as_matrix, check_same_dim

# generic divided differences fall back to h'(midpoint) below this gap
_GENERIC_DD_SWITCH = 1e-5


@dataclass(frozen=True)
class ScalarFunction:
    """A scalar function lifted to symmetric tensors.

    ``dd`` optionally supplies a stable first divided difference; without
    it the quotient is used, with ``h_prime`` at the midpoint for nearly
    coincident arguments.
    """

    h: Callable[[float], float]
    h_prime: Callable[[float], float]
    dd: Optional[Callable[[float, float], float]] = None
    name: str = "h"

    def divided_difference(self, a: float, b: float) -> float:
        if self.dd is not None:
            return self.dd(a, b)
        if abs(a - b) < _GENERIC_DD_SWITCH * max(1.0, abs(a), abs(b)):
            return self.h_prime(0.5 * (a + b))
        return (self.h(a) - self.h(b)) / (a - b)


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise KernelOverflow(f"exp({x}) is not representable") from None


EXP = ScalarFunction(_safe_exp, _safe_exp, dd_exp, "exp")
LOG = ScalarFunction(math.log, lambda x: 1.0 / x, None, "log")


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _in_basis(vecs, x):
    return vecs.T @ x @ vecs


def _from_basis(vecs, x):
    return vecs @ x @ vecs.T


def _dd_matrix(lam, func: ScalarFunction) -> np.ndarray:
    d = lam.shape[0]
    m = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            m[i, j] = m[j, i] = func.divided_difference(lam[i], lam[j])
    return m


def _f_matrix(lam) -> np.ndarray:
    d = lam.shape[0]
    m = np.empty((d, d))
    for i in range(d):
        m[i, i] = 2.0
        for j in range(i + 1, d):
            m[i, j] = m[j, i] = f_eval(lam[i] - lam[j])
    return m


def _ddf_tensor(lam, thresholds: KernelThresholds) -> np.ndarray:
    """D[i, j, k] = (f(l_i - l_k) - f(l_j - l_k)) / (l_i - l_j)."""
    d = lam.shape[0]
    t = np.empty((d, d, d))
    for k in range(d):
        for i in range(d):
            for j in range(i, d):
                t[i, j, k] = t[j, i, k] = divided_diff("f", lam[i] - lam[k], lam[j] - lam[k], thresholds)
    return t


def _exp2_tensor(lam, thresholds: KernelThresholds) -> np.ndarray:
    d = lam.shape[0]
    t = np.empty((d, d, d))
    for i in range(d):
        for j in range(i, d):
            for k in range(j, d):
                v = three_eig_factor(lam[i], lam[j], lam[k], thresholds)
                for p in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
                    t[p] = v
    return t


def apply_scalar(psi, h: ScalarFunction) -> np.ndarray:
    """h(psi) = sum_i h(l_i) P_i."""
    lam, vecs = _eigenbasis(psi)
    vals = np.array([h.h(x) for x in lam])
    if not np.all(np.isfinite(vals)):
        raise NonFinite(f"{h.name} is not finite on the spectrum {lam}")
    return _sym((vecs * vals) @ vecs.T)


def dfun_apply(psi, h: ScalarFunction, dpsi) -> np.ndarray:
    """Directional derivative of psi -> h(psi) along dpsi."""
    psi, dpsi = as_matrix(psi), as_matrix(dpsi)
    check_same_dim(psi, dpsi)
    lam, vecs = _eigenbasis(psi)
    return _sym(_from_basis(vecs, _dd_matrix(lam, h) * _in_basis(vecs, dpsi)))


def F_apply(psi, eps) -> np.ndarray:
    """Strain operator sum_ij f(l_i - l_j) P_i eps P_j."""
    psi, eps = as_matrix(psi), as_matrix(eps)
    check_same_dim(psi, eps)
    lam, vecs = _eigenbasis(psi)
    return _sym(_from_basis(vecs, _f_matrix(lam) * _in_basis(vecs, eps)))


def _dF_in_basis(ddf, eps_t, dpsi_t):
    a = np.einsum("ijk,ij,jk->ik", ddf, dpsi_t, eps_t)
    return a + a.T


def dF_apply(psi, eps, dpsi, thresholds: KernelThresholds = DEFAULT_THRESHOLDS) -> np.ndarray:
    """Derivative of F_apply(., eps) at psi along dpsi."""
    psi, eps, dpsi = as_matrix(psi), as_matrix(eps), as_matrix(dpsi)
    check_same_dim(psi, eps, dpsi)
    lam, vecs = _eigenbasis(psi)
    ddf = _ddf_tensor(lam, thresholds)
    return _sym(_from_basis(vecs, _dF_in_basis(ddf, _in_basis(vecs, eps), _in_basis(vecs, dpsi))))


def _as_grad(grad, d) -> np.ndarray:
    g = np.asarray(grad, dtype=float)
    if g.shape != (d, d, d):
        raise DimensionMismatch(f"gradient field must have shape {(d, d, d)}, got {g.shape}")
    return g


def _div_in_basis(vecs, weights, grad) -> np.ndarray:
    d = vecs.shape[0]
    out = np.zeros(d)
    for i in range(d):
        m = _from_basis(vecs, weights * _in_basis(vecs, grad[i]))
        out += m[:, i]
    return out


def div_exp(psi, grad) -> np.ndarray:
    """Divergence of exp(psi(x)) given psi and its partials grad[i] = d_i psi.

    Component r is sum_i d_i exp(psi)_{ri}.
    """
    psi = as_matrix(psi)
    d = psi.shape[0]
    grad = _as_grad(grad, d)
    lam, vecs = _eigenbasis(psi)
    return _div_in_basis(vecs, _dd_matrix(lam, EXP), grad)


def d_div_exp(
    psi, grad, dpsi, dgrad, thresholds: KernelThresholds = DEFAULT_THRESHOLDS
) -> np.ndarray:
    """Derivative of div_exp along (dpsi, dgrad)."""
    psi, dpsi = as_matrix(psi), as_matrix(dpsi)
    d = check_same_dim(psi, dpsi)
    grad, dgrad = _as_grad(grad, d), _as_grad(dgrad, d)
    lam, vecs = _eigenbasis(psi)
    out = _div_in_basis(vecs, _dd_matrix(lam, EXP), dgrad)
    t = _exp2_tensor(lam, thresholds)
    dpsi_t = _in_basis(vecs, dpsi)
    for l in range(d):
        a = np.einsum("ijk,ij,jk->ik", t, dpsi_t, _in_basis(vecs, grad[l]))
        out += _from_basis(vecs, a + a.T)[:, l]
    return out
