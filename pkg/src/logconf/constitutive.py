"""Oldroyd-B / Giesekus constitutive residuals for homogeneous flows.

With fields constant in space the advection terms drop and the
log-conformation equation becomes the algebraic system

    R(psi) = [psi, Omega] - F(psi, eps) + (1/lambda) h(psi) = 0,

where ``h(psi) = P(e^psi) e^-psi`` is evaluated through its scalar
closed form.  ``residual_sigma`` is the same model written for the
conformation tensor itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, KernelOverflow, NotPositiveDefinite
from .kernels import DEFAULT_THRESHOLDS, KernelThresholds, dd_exp
from .matfun import (
    ScalarFunction,
    _dd_matrix,
    dF_apply,
    dfun_apply,
    _ddf_tensor,
    _dF_in_basis,
    _f_matrix,
    _from_basis,
    _in_basis,
    _sym,
    apply_scalar,
)
from .tensor import VOIGT_PAIRS, _eigenbasis, as_matrix, check_finite, from_voigt, voigt_size


class Model(str, Enum):
    OLDROYD_B = "oldroyd-b"
    GIESEKUS = "giesekus"


@dataclass(frozen=True)
class ModelParams:
    model: Model = Model.OLDROYD_B
    lam: float = 1.0
    alpha: float = 0.0
    beta: float = 0.5  # viscosity ratio, carried as metadata only
    wi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        problems = []
        if not self.lam > 0:
            problems.append("lambda must be > 0")
        if not 0.0 <= self.alpha <= 1.0:
            problems.append("alpha must lie in [0, 1]")
        if self.model is Model.OLDROYD_B and self.alpha != 0.0:
            problems.append("alpha must be 0 for Oldroyd-B")
        if not 0.0 < self.beta <= 1.0:
            problems.append("beta must lie in (0, 1]")
        if not self.wi >= 0:
            problems.append("wi must be >= 0")
        if problems:
            raise ValueError("; ".join(problems))

    @classmethod
    def oldroyd_b(cls, lam=1.0, **kw):
        return cls(Model.OLDROYD_B, lam, 0.0, **kw)

    @classmethod
    def giesekus(cls, alpha, lam=1.0, **kw):
        return cls(Model.GIESEKUS, lam, alpha, **kw)

    @property
    def relaxation(self) -> ScalarFunction:
        return relaxation_function(self)


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        raise KernelOverflow(f"exp({x}) overflows") from None


def _dd_expneg(a, b):
    # (e^-a - e^-b)/(a - b) == -dd_exp(-a, -b)
    return -dd_exp(-a, -b)


def relaxation_function(params: ModelParams) -> ScalarFunction:
    """Scalar h with h(psi) = P(e^psi) e^-psi for the chosen model."""
    if params.model is Model.OLDROYD_B or params.alpha == 0.0:
        return ScalarFunction(
            lambda x: 1.0 - _exp(-x),
            lambda x: _exp(-x),
            lambda a, b: -_dd_expneg(a, b),
            "h_oldroyd_b",
        )
    al = params.alpha
    return ScalarFunction(
        lambda x: al * _exp(x) + (1.0 - 2.0 * al) - (1.0 - al) * _exp(-x),
        lambda x: al * _exp(x) + (1.0 - al) * _exp(-x),
        lambda a, b: al * dd_exp(a, b) - (1.0 - al) * _dd_expneg(a, b),
        "h_giesekus",
    )


@dataclass(frozen=True)
class FlowKinematics:
    grad_u: np.ndarray
    eps: np.ndarray
    omega: np.ndarray

    @property
    def dim(self) -> int:
        return self.grad_u.shape[0]

    def rotated(self, q) -> "FlowKinematics":
        q = np.asarray(q, dtype=float)
        return split_kinematics(q @ self.grad_u @ q.T)


def split_kinematics(grad_u) -> FlowKinematics:
    """Split grad_u (entry [i, j] = d u_i / d x_j) into strain and vorticity."""
    g = as_matrix(grad_u).copy()
    check_finite(g, "velocity gradient")
    return FlowKinematics(g, 0.5 * (g + g.T), 0.5 * (g - g.T))


def shear_flow(rate: float, dim: int = 3) -> FlowKinematics:
    g = np.zeros((dim, dim))
    g[0, 1] = rate
    return split_kinematics(g)


def extension_flow(rate: float, dim: int = 3) -> FlowKinematics:
    """Uniaxial extension along x (planar extension when dim=2)."""
    if dim == 3:
        g = np.diag([rate, -0.5 * rate, -0.5 * rate])
    else:
        g = np.diag([rate, -rate])
    return split_kinematics(g)


def rest_flow(dim: int = 3) -> FlowKinematics:
    return split_kinematics(np.zeros((dim, dim)))


def P_apply(sigma, params: ModelParams) -> np.ndarray:
    s = as_matrix(sigma)
    a = s - np.eye(s.shape[0])
    if params.model is Model.GIESEKUS:
        return a + params.alpha * (a @ a)
    return a


def relax_term(psi, params: ModelParams) -> np.ndarray:
    """(1/lambda) P(e^psi) e^-psi via the scalar closed form."""
    return apply_scalar(psi, relaxation_function(params)) / params.lam


def _check_dims(psi, kin):
    if psi.shape != kin.grad_u.shape:
        raise DimensionMismatch(f"state {psi.shape} vs kinematics {kin.grad_u.shape}")


def residual_psi(psi, kin: FlowKinematics, params: ModelParams) -> np.ndarray:
    psi = as_matrix(psi)
    _check_dims(psi, kin)
    lam, vecs = _eigenbasis(psi)
    h = relaxation_function(params)
    diag = np.array([h.h(x) for x in lam]) / params.lam
    inner = diag[:, None] * np.eye(len(lam)) - _f_matrix(lam) * _in_basis(vecs, kin.eps)
    comm = psi @ kin.omega - kin.omega @ psi
    return _sym(comm + _from_basis(vecs, inner))


def jacobian_psi(
    psi, kin: FlowKinematics, params: ModelParams, thresholds: KernelThresholds = DEFAULT_THRESHOLDS
) -> np.ndarray:
    """Dense m x m Jacobian of residual_psi in Voigt coordinates.

    Column k is the Voigt image of J applied to the k-th Voigt unit
    direction (off-diagonal units set both mirrored entries).
    """
    psi = as_matrix(psi)
    _check_dims(psi, kin)
    d = psi.shape[0]
    m = voigt_size(d)
    lam, vecs = _eigenbasis(psi)
    ddf = _ddf_tensor(lam, thresholds)
    ddh = _dd_matrix(lam, relaxation_function(params)) / params.lam
    eps_t = _in_basis(vecs, kin.eps)
    jac = np.empty((m, m))
    for k in range(m):
        e = np.zeros(m)
        e[k] = 1.0
        dpsi = from_voigt(e)
        dpsi_t = _in_basis(vecs, dpsi)
        inner = ddh * dpsi_t - _dF_in_basis(ddf, eps_t, dpsi_t)
        col = dpsi @ kin.omega - kin.omega @ dpsi + _from_basis(vecs, inner)
        col = _sym(col)
        jac[:, k] = [col[i, j] for i, j in VOIGT_PAIRS[d]]
    return jac


def apply_jacobian(psi, kin, params, dpsi, thresholds=DEFAULT_THRESHOLDS) -> np.ndarray:
    """J[dpsi] as a symmetric matrix (matrix-free counterpart of jacobian_psi)."""
    dpsi = as_matrix(dpsi)
    return _sym(
        dpsi @ kin.omega
        - kin.omega @ dpsi
        - dF_apply(psi, kin.eps, dpsi, thresholds)
        + dfun_apply(psi, relaxation_function(params), dpsi) / params.lam
    )


def residual_sigma(sigma, kin: FlowKinematics, params: ModelParams, check_spd: bool = True) -> np.ndarray:
    s = as_matrix(sigma)
    _check_dims(s, kin)
    if check_spd:
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("conformation tensor is not positive definite") from None
    e, w = kin.eps, kin.omega
    return s @ w - w @ s - e @ s - s @ e + P_apply(s, params) / params.lam


def rhs_transient_psi(psi, kin, params) -> np.ndarray:
    return -residual_psi(psi, kin, params)


def rhs_transient_sigma(sigma, kin, params) -> np.ndarray:
    return -residual_sigma(sigma, kin, params)
