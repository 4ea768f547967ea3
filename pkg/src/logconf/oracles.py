"""Independent evaluation routes for the strain operator and exp derivatives.

None of these touch the Jacobi eigensolver: the series route works with
iterated commutators, the contour route with resolvents on an ellipse,
and the Wilcox integrals with ``scipy.linalg.expm``.  They exist to
cross-check :mod:`logconf.matfun`, not for production use; Cauchy-type
quadratures lose digits to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ContourTooSmall, NoConvergence, PreconditionViolated, SingularResolvent
from .kernels import f_series_coefficients
from .tensor import as_matrix, check_same_dim

RESOLVENT_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class Contour:
    """Ellipse z = a cos(t) + i b sin(t) sampled at ``nodes`` points."""

    semi_major: float
    semi_minor: float = math.pi / 2
    nodes: int = 64

    def __post_init__(self):
        if not 0.0 < self.semi_minor < math.pi:
            raise ValueError("semi_minor must lie in (0, pi) to keep the poles of f outside")
        if self.semi_major <= 0.0:
            raise ValueError("semi_major must be positive")
        if self.nodes < 8 or self.nodes % 2:
            raise ValueError("nodes must be even and >= 8")

    @classmethod
    def around(cls, psi, semi_minor: float = math.pi / 2, nodes: int = 64) -> "Contour":
        return cls(float(np.linalg.norm(as_matrix(psi))) + 1.0, semi_minor, nodes)

    def points(self):
        """Nodes z_k and trapezoid weights dz_k."""
        t = 2.0 * math.pi * np.arange(self.nodes) / self.nodes
        z = self.semi_major * np.cos(t) + 1j * self.semi_minor * np.sin(t)
        dz = (-self.semi_major * np.sin(t) + 1j * self.semi_minor * np.cos(t)) * (
            2.0 * math.pi / self.nodes
        )
        return z, dz


def _solve(a: np.ndarray, b: np.ndarray):
    """Batched Gaussian elimination with partial pivoting.

    ``a`` is (n, d, d), ``b`` is (n, d, m).  Returns the solution and the
    smallest pivot magnitude met, per system.
    """
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    n, d, _ = a.shape
    rows = np.arange(n)
    min_pivot = np.full(n, np.inf)
    for c in range(d):
        p = c + np.argmax(np.abs(a[:, c:, c]), axis=1)
        a[rows, c], a[rows, p] = a[rows, p].copy(), a[rows, c].copy()
        b[rows, c], b[rows, p] = b[rows, p].copy(), b[rows, c].copy()
        piv = a[:, c, c]
        min_pivot = np.minimum(min_pivot, np.abs(piv))
        safe = np.where(piv == 0, 1.0, piv)
        for r in range(c + 1, d):
            fac = a[:, r, c] / safe
            a[:, r, c:] -= fac[:, None] * a[:, c, c:]
            b[:, r] -= fac[:, None] * b[:, c]
    x = np.zeros_like(b)
    for r in range(d - 1, -1, -1):
        acc = b[:, r] - np.einsum("nk,nkm->nm", a[:, r, r + 1 :], x[:, r + 1 :])
        x[:, r] = acc / np.where(a[:, r, r] == 0, 1.0, a[:, r, r])[:, None]
    return x, min_pivot


def _resolvents(psi: np.ndarray, z: np.ndarray) -> np.ndarray:
    d = psi.shape[0]
    eye = np.eye(d)
    sys = z[:, None, None] * eye - psi
    x, min_pivot = _solve(sys, np.broadcast_to(eye, sys.shape))
    scale = np.maximum(1.0, np.abs(z))
    bad = min_pivot < RESOLVENT_PIVOT_TOL * scale
    if np.any(bad):
        raise SingularResolvent(f"z = {z[bad][0]} is (numerically) in the spectrum")
    return x


def resolvent(psi, z: complex) -> np.ndarray:
    """(z I - psi)^-1 as a complex matrix."""
    psi = as_matrix(psi)
    return _resolvents(psi, np.array([complex(z)]))[0]


def _f_complex(w: np.ndarray) -> np.ndarray:
    out = np.full(w.shape, 2.0, dtype=complex)
    nz = w != 0
    out[nz] = w[nz] / np.tanh(0.5 * w[nz])
    return out


def _prepare(psi, contour):
    psi = as_matrix(psi)
    if contour is None:
        contour = Contour.around(psi)
    radius = float(np.linalg.norm(psi, 2))
    if contour.semi_major <= radius:
        raise ContourTooSmall(
            f"semi_major {contour.semi_major} does not enclose spectral radius {radius}"
        )
    z, dz = contour.points()
    r = _resolvents(psi, z)
    w = _f_complex(z[:, None] - z[None, :]) * dz[:, None] * dz[None, :]
    return psi, r, w


def _real_part(x: np.ndarray, imag_tol: float) -> np.ndarray:
    scale = max(1.0, float(np.linalg.norm(x.real)))
    if np.linalg.norm(x.imag) > imag_tol * scale:
        raise NoConvergence(
            f"contour quadrature left an imaginary part of {np.linalg.norm(x.imag):.3e}; use more nodes"
        )
    return x.real


def F_contour_oracle(psi, eps, contour: Contour | None = None, imag_tol: float = 1e-8) -> np.ndarray:
    """Trapezoidal double contour integral for the strain operator."""
    psi, r, w = _prepare(psi, contour)
    eps = as_matrix(eps)
    check_same_dim(psi, eps)
    s = np.einsum("kl,lab->kab", w, r)
    total = np.einsum("kab,bc,kcd->ad", r, eps, s)
    return _real_part(total / (2j * math.pi) ** 2, imag_tol)


def dF_contour_oracle(
    psi, eps, dpsi, contour: Contour | None = None, imag_tol: float = 1e-8
) -> np.ndarray:
    """Contour route for the derivative of the strain operator along dpsi."""
    psi, r, w = _prepare(psi, contour)
    eps, dpsi = as_matrix(eps), as_matrix(dpsi)
    check_same_dim(psi, eps, dpsi)
    rdr = np.einsum("kab,bc,kcd->kad", r, dpsi, r)
    s = np.einsum("kl,lab->kab", w, r)
    s2 = np.einsum("kl,lab->kab", w, rdr)
    total = np.einsum("kab,bc,kcd->ad", rdr, eps, s) + np.einsum("kab,bc,kcd->ad", r, eps, s2)
    return _real_part(total / (2j * math.pi) ** 2, imag_tol)


def F_series_oracle(psi, eps, tol: float = 1e-14, max_terms: int = 256) -> np.ndarray:
    """Even Bernoulli series 2 sum_n B_2n/(2n)! {psi, eps}_2n.

    Converges only for spectral norm below pi.  Stops once two successive
    terms fall below ``tol`` relative to the partial sum.
    """
    psi, eps = as_matrix(psi), as_matrix(eps)
    check_same_dim(psi, eps)
    norm2 = float(np.linalg.norm(psi, 2))
    if norm2 >= math.pi:
        raise PreconditionViolated(f"series needs ||psi||_2 < pi, got {norm2:.6g}")
    coef = f_series_coefficients(max_terms + 1)
    c = eps.copy()
    total = coef[0] * c
    quiet = 0
    for n in range(1, max_terms + 1):
        c = psi @ c - c @ psi
        c = psi @ c - c @ psi
        term = coef[n] * c
        total = total + term
        tn = np.linalg.norm(term)
        if tn == 0.0 or tn < tol * np.linalg.norm(total):
            quiet += 1
            if quiet == 2 or tn == 0.0:
                return total
        else:
            quiet = 0
    raise NoConvergence(f"series not converged after {max_terms} terms")


def wilcox_sandwich(psi, x, quad_order: int = 32) -> np.ndarray:
    """Gauss-Legendre value of int_0^1 e^((1-a) psi) x e^(a psi) da."""
    if quad_order < 4:
        raise ValueError("quad_order must be >= 4")
    psi, x = as_matrix(psi), as_matrix(x)
    check_same_dim(psi, x)
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    alphas = 0.5 * (nodes + 1.0)
    out = np.zeros_like(x)
    for a, w in zip(alphas, 0.5 * weights):
        out += w * (expm((1.0 - a) * psi) @ x @ expm(a * psi))
    return out


def dexp_wilcox_oracle(psi, dpsi, quad_order: int = 32) -> np.ndarray:
    """Derivative of exp at psi along dpsi from the Wilcox integral."""
    return wilcox_sandwich(psi, dpsi, quad_order)
