"""Newton-Raphson for steady homogeneous states, RK4 for transients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Literal

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .constitutive import FlowKinematics, ModelParams, jacobian_psi, residual_psi, residual_sigma
from .errors import (
    InsufficientHistory,
    KernelOverflow,
    LogConfError,
    NoConvergence,
    NonFinite,
    SingularJacobian,
    StepFailure,
)
from .tensor import as_matrix, from_voigt, to_voigt

BLOWUP_NORM = 50.0
PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class NewtonSettings:
    abs_tol: float = 1e-12
    max_iter: int = 50
    record_history: bool = True
    # the last update must also be small, relative to max(1, ||psi||_F)
    step_tol: float = 1e-4

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class NewtonReport:
    converged: bool
    iterations: int
    residual_history: List[float]
    solution: np.ndarray
    reason: str = "converged"

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]

    def raise_for_status(self) -> "NewtonReport":
        if self.converged:
            return self
        if self.reason.startswith("singular"):
            raise SingularJacobian(self.reason)
        raise NoConvergence(self.reason)


def newton_solve(
    initial,
    kin: FlowKinematics,
    params: ModelParams,
    settings: NewtonSettings = NewtonSettings(),
) -> NewtonReport:
    """Plain (undamped) Newton on residual_psi in Voigt coordinates.

    Failure (iteration limit, blow-up, singular Jacobian) is returned as
    a report with ``converged=False``; ``raise_for_status`` turns it into
    NoConvergence or SingularJacobian.  ``iterations`` counts
    linear solves, so a state that already satisfies the tolerance is
    reported after one (trivial) iteration.

    A small residual alone is not accepted while the updates are still
    large: past the extensional limit the iterates drift to infinity
    with a residual that decays like exp(-psi).
    """
    psi = as_matrix(initial).copy()
    history: List[float] = []
    last_step = 0.0

    def done(ok, it, reason):
        return NewtonReport(ok, it, history if settings.record_history else history[-1:], psi, reason)

    for it in range(settings.max_iter + 1):
        try:
            r = residual_psi(psi, kin, params)
        except LogConfError as exc:
            return done(False, it, f"residual evaluation failed: {exc}")
        rn = float(np.linalg.norm(r))
        history.append(rn)
        if not math.isfinite(rn):
            return done(False, it, "non-finite residual")
        if rn <= settings.abs_tol and last_step <= settings.step_tol * max(1.0, float(np.linalg.norm(psi))):
            return done(True, max(it, 1), "converged")
        if it == settings.max_iter:
            break
        jac = jacobian_psi(psi, kin, params)
        lu, piv = lu_factor(jac, check_finite=False)
        scale = max(1.0, float(np.abs(jac).max()))
        if np.min(np.abs(np.diag(lu))) < PIVOT_TOL * scale:
            return done(False, it, f"singular Jacobian: pivot below {PIVOT_TOL:g} at iteration {it}")
        step = lu_solve((lu, piv), -to_voigt(r), check_finite=False)
        delta = from_voigt(step)
        last_step = float(np.linalg.norm(delta))
        psi = psi + delta
        if not np.all(np.isfinite(psi)) or np.linalg.norm(psi) > BLOWUP_NORM:
            history.append(float("inf"))
            return done(False, it + 1, f"||psi||_F exceeded {BLOWUP_NORM:g} (blow-up)")
    return done(False, settings.max_iter, f"max_iter={settings.max_iter} reached")


def convergence_order(history, floor: float = np.finfo(float).eps) -> float:
    """Least-squares slope of log r_{k+1} against log r_k.

    Only the middle phase is used: from the first residual below
    0.1 * r_0 up to (excluding) the first one below 1e3 * floor.
    At least three entries (two pairs) must remain.
    """
    r = np.asarray(history, dtype=float)
    if r.size < 4:
        raise InsufficientHistory("need at least 4 residuals")
    below = np.nonzero(r < 0.1 * r[0])[0]
    below = below[below >= 1]
    if below.size == 0:
        raise InsufficientHistory("residual never dropped below 0.1 * r_0")
    start = int(below[0])
    at_floor = np.nonzero(r[start:] < 1e3 * floor)[0]
    stop = start + int(at_floor[0]) if at_floor.size else r.size
    window = r[start:stop]
    window = window[window > 0]
    if window.size < 3:
        raise InsufficientHistory(f"mid-phase window has only {window.size} entries")
    x, y = np.log(window[:-1]), np.log(window[1:])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass
class TransientResult:
    times: np.ndarray
    path: np.ndarray  # (n_steps + 1, d, d); psi or sigma depending on form
    form: str = "psi"


def rk4_integrate(
    form: Literal["psi", "sigma"],
    initial,
    kin: FlowKinematics,
    params: ModelParams,
    t_end: float,
    dt: float,
) -> TransientResult:
    """Classical fixed-step RK4 for d/dt X = -R(X).

    The sigma form is checked for positive definiteness after every
    step; losing it raises StepFailure carrying the failing time.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end must be a positive integer multiple of dt")
    x = as_matrix(initial).copy()
    if form == "psi":
        def rhs(s):
            return -residual_psi(s, kin, params)
    elif form == "sigma":
        _require_spd(x, 0.0)

        def rhs(s):
            return -residual_sigma(s, kin, params, check_spd=False)
    else:
        raise ValueError(f"unknown form {form!r}")

    path = np.empty((n + 1,) + x.shape)
    path[0] = x
    for k in range(n):
        t = (k + 1) * dt
        try:
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * dt * k1)
            k3 = rhs(x + 0.5 * dt * k2)
            k4 = rhs(x + dt * k3)
        except (KernelOverflow, NonFinite, NoConvergence) as exc:
            raise StepFailure(f"stage evaluation failed in step ending at t={t:g}: {exc}", time=t) from None
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise StepFailure(f"non-finite state at t={t:g}", time=t)
        if form == "sigma":
            _require_spd(x, t)
        path[k + 1] = x
    return TransientResult(dt * np.arange(n + 1), path, form)


def _require_spd(x, t):
    try:
        np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        raise StepFailure(f"sigma lost positive definiteness at t={t:g}", time=t) from None
