"""Seeded invariant suites run by ``logconf verify``.

Each suite draws its cases from one ``numpy.random.Generator`` seeded
from the run seed and the suite name, so a report depends only on the
seed and the number of cases.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from . import kernels
from .constitutive import ModelParams, jacobian_psi, residual_psi, shear_flow, split_kinematics
from .matfun import EXP, F_apply, apply_scalar, dF_apply
from .oracles import Contour, F_contour_oracle, F_series_oracle, wilcox_sandwich
from .solvers import NewtonSettings, newton_solve
from .tensor import from_voigt, to_voigt, voigt_size


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    cases: int
    max_error: float
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "max_error", float(self.max_error))

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def random_sym(rng: np.random.Generator, d: int, norm: float) -> np.ndarray:
    """Symmetric matrix with Frobenius norm ``norm``."""
    a = rng.standard_normal((d, d))
    a = a + a.T
    return a * (norm / np.linalg.norm(a))


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def with_spectrum(rng: np.random.Generator, eigenvalues) -> np.ndarray:
    q = random_orthogonal(rng, len(eigenvalues))
    a = (q * np.asarray(eigenvalues, dtype=float)) @ q.T
    return 0.5 * (a + a.T)


def random_state(rng: np.random.Generator, d: int, norm: float, k: int) -> np.ndarray:
    """Every fourth state has a repeated eigenvalue (triple when d=3)."""
    if k % 4 == 3:
        mu = rng.uniform(-1.0, 1.0) * norm / math.sqrt(d)
        lam = [mu] * d
        if k % 8 == 3:
            lam[0] = mu + rng.uniform(0.5, 1.0)
        return with_spectrum(rng, lam)
    return random_sym(rng, d, norm * rng.uniform(0.1, 1.0))


def central_difference(fn: Callable, x: np.ndarray, dx: np.ndarray, t: float) -> np.ndarray:
    return (fn(x + t * dx) - fn(x - t * dx)) / (2.0 * t)


def _rng(seed: int, suite: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(suite.encode())])


def _dims(n):
    return [2 + (k % 2) for k in range(n)]


def suite_f_series(seed, n):
    rng = _rng(seed, "f_series")
    worst = 0.0
    for k, d in enumerate(_dims(n)):
        psi = random_state(rng, d, 1.0, k)
        psi *= 0.9 * math.pi * rng.uniform(0.1, 1.0) / max(np.linalg.norm(psi, 2), 1e-300)
        eps = random_sym(rng, d, 1.0)
        ref = F_series_oracle(psi, eps)
        err = np.linalg.norm(F_apply(psi, eps) - ref) / max(1.0, np.linalg.norm(ref))
        worst = max(worst, err)
    return SuiteResult("f_series", n, worst, 1e-10)


def suite_f_contour(seed, n):
    rng = _rng(seed, "f_contour")
    worst = 0.0
    for k, d in enumerate(_dims(n)):
        psi = random_state(rng, d, 4.0, k)
        eps = random_sym(rng, d, 1.0)
        ref = F_contour_oracle(psi, eps, Contour.around(psi, nodes=128))
        worst = max(worst, np.linalg.norm(F_apply(psi, eps) - ref))
    return SuiteResult("f_contour", n, worst, 1e-8)


def suite_wilcox(seed, n):
    rng = _rng(seed, "wilcox_identity")
    worst = 0.0
    for k, d in enumerate(_dims(n)):
        psi = random_state(rng, d, 4.0, k)
        eps = random_sym(rng, d, 1.0)
        e = apply_scalar(psi, EXP)
        lhs = wilcox_sandwich(psi, F_apply(psi, eps))
        worst = max(worst, np.linalg.norm(lhs - (eps @ e + e @ eps)))
    return SuiteResult("wilcox_identity", n, worst, 1e-8)


def suite_dF_fd(seed, n):
    rng = _rng(seed, "dF_fd")
    worst = 0.0
    for k, d in enumerate(_dims(n)):
        psi = random_state(rng, d, 2.0, k)
        eps, dpsi = random_sym(rng, d, 1.0), random_sym(rng, d, 1.0)
        fd = central_difference(lambda p: F_apply(p, eps), psi, dpsi, 1e-5)
        worst = max(worst, np.abs(dF_apply(psi, eps, dpsi) - fd).max())
    return SuiteResult("dF_fd", n, worst, 5e-7)


def suite_jacobian_fd(seed, n):
    rng = _rng(seed, "jacobian_fd")
    worst = 0.0
    for k, d in enumerate(_dims(n)):
        psi = random_state(rng, d, 2.0, k)
        kin = split_kinematics(rng.standard_normal((d, d)))
        params = ModelParams.giesekus(0.1, 1.0) if k % 2 else ModelParams.oldroyd_b(1.0)
        jac = jacobian_psi(psi, kin, params)
        for c in range(voigt_size(d)):
            e = np.zeros(voigt_size(d))
            e[c] = 1.0
            fd = central_difference(lambda p: residual_psi(p, kin, params), psi, from_voigt(e), 1e-5)
            worst = max(worst, np.abs(jac[:, c] - to_voigt(fd)).max())
    return SuiteResult("jacobian_fd", n, worst, 5e-7)


def _continuity_pairs(th: kernels.KernelThresholds):
    """(below, above) values across each branch switch."""
    out = []
    for tau, fn in (
        (th.deriv_f_switch, lambda x: kernels.f_deriv(x, th)),
        (th.deriv_g_switch, lambda x: kernels.g_deriv(x, th)),
    ):
        for sgn in (1.0, -1.0):
            out.append((fn(sgn * tau * (1 - 1e-12)), fn(sgn * tau * (1 + 1e-12))))
    for kern, tau in (("f", th.dd_f_switch), ("g", th.dd_g_switch)):
        for m in (-2.0, -0.3, 0.0, 0.7, 2.5):
            lo = kernels.divided_diff(kern, m + 0.5 * tau * (1 - 1e-12), m - 0.5 * tau * (1 - 1e-12), th)
            hi = kernels.divided_diff(kern, m + 0.5 * tau * (1 + 1e-12), m - 0.5 * tau * (1 + 1e-12), th)
            out.append((lo, hi))
    return out


def suite_kernel_continuity(seed, n):
    th = kernels.DEFAULT_THRESHOLDS
    pairs = _continuity_pairs(th)
    worst = max(abs(a - b) / max(abs(a), abs(b), 1e-300) for a, b in pairs)
    return SuiteResult("kernel_continuity", len(pairs), worst, 1e-9)


def suite_newton_shear(seed, n):
    rep = newton_solve(np.zeros((3, 3)), shear_flow(1.0), ModelParams.oldroyd_b(1.0), NewtonSettings())
    if not rep.converged:
        return SuiteResult("newton_shear_fixture", 1, math.inf, 1e-10)
    sigma = apply_scalar(rep.solution, EXP)
    err = max(abs(sigma[0, 1] - 1.0), abs(sigma[0, 0] - 3.0))
    return SuiteResult("newton_shear_fixture", 1, err, 1e-10)


SUITES: Dict[str, Callable[[int, int], SuiteResult]] = {
    "f_series": suite_f_series,
    "f_contour": suite_f_contour,
    "wilcox_identity": suite_wilcox,
    "dF_fd": suite_dF_fd,
    "jacobian_fd": suite_jacobian_fd,
    "kernel_continuity": suite_kernel_continuity,
    "newton_shear_fixture": suite_newton_shear,
}


def run_suites(seed: int, cases: int) -> List[SuiteResult]:
    return [fn(seed, cases) for fn in SUITES.values()]
