"""Centerline model of the stretch Psi_xx in the wake behind a sphere.

On the symmetry axis Psi and grad u are diagonal and the xx component
obeys the scalar transport equation

    u_x d/dx Psi_xx - 2 d/dx u_x = -(1/lambda) h(Psi_xx),

with h the model's relaxation function.  The velocity along the axis is
prescribed by a :class:`WakeProfile`; ``u_x`` and ``d u_x/dx`` are
treated as given data since the 1D reduction cannot enforce continuity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .constitutive import Model, ModelParams, relaxation_function
from .errors import BlowUp, NoInteriorExtremum, StepFailure

BLOWUP_PSI = 50.0
PSI0_CLAMP = (0.0, 10.0)
# real-axis stability interval of classical RK4 is about [-2.785, 0]
RK4_STABILITY = 2.785


@dataclass(frozen=True)
class WakeProfile:
    """Axial velocity behind the sphere.

    Default family (``plateau_rate is None``) recovers smoothly from
    u_x = 0 at the rear stagnation point x = R::

        u_x = u_bar (1 - (1 + k s) e^(-k s)),   s = x - R

    With ``plateau_rate`` set, u_x is frozen at u_bar and the strain rate
    is a smoothed top hat of height ``plateau_rate`` on
    [plateau_start, plateau_end]; this keeps 2 lambda du_x/dx above one
    for as long as needed.
    """

    u_bar: float = 1.0
    kappa: float = 1.0
    r_sphere: float = 1.0
    x_start: Optional[float] = None
    x_end: Optional[float] = None
    plateau_rate: Optional[float] = None
    plateau_start: Optional[float] = None
    plateau_end: Optional[float] = None
    plateau_edge: float = 0.1

    def __post_init__(self):
        if not (self.u_bar > 0 and self.kappa > 0 and self.r_sphere > 0):
            raise ValueError("u_bar, kappa and r_sphere must be positive")
        if self.x_start is None:
            object.__setattr__(self, "x_start", 1.1 * self.r_sphere)
        if self.x_end is None:
            object.__setattr__(self, "x_end", 12.0 * self.r_sphere)
        if not self.x_start > self.r_sphere:
            raise ValueError("x_start must lie downstream of the sphere (x_start > R)")
        if not self.x_end > self.x_start:
            raise ValueError("x_end must exceed x_start")
        if self.plateau_rate is not None:
            if self.plateau_start is None:
                object.__setattr__(self, "plateau_start", self.x_start + 0.5 * self.r_sphere)
            if self.plateau_end is None:
                object.__setattr__(self, "plateau_end", self.x_end - 0.5 * self.r_sphere)
            if not self.plateau_edge > 0:
                raise ValueError("plateau_edge must be positive")

    @property
    def dux_peak(self) -> float:
        if self.plateau_rate is not None:
            return abs(self.plateau_rate)
        return self.u_bar * self.kappa / math.e


def profile_eval(p: WakeProfile, x: float):
    """(u_x, du_x/dx) at x.

    The recovery family is defined from the sphere surface x = R on; the
    plateau family only from x_start.
    """
    lower = p.x_start if p.plateau_rate is not None else p.r_sphere
    if x < lower - 1e-12 * max(1.0, abs(lower)):
        raise ValueError(f"x={x} lies outside the profile domain x >= {lower}")
    if p.plateau_rate is not None:
        w = p.plateau_edge
        window = 0.5 * (math.tanh((x - p.plateau_start) / w) - math.tanh((x - p.plateau_end) / w))
        return p.u_bar, p.plateau_rate * window
    s = x - p.r_sphere
    decay = math.exp(-p.kappa * s)
    ux = p.u_bar * (1.0 - (1.0 + p.kappa * s) * decay)
    dux = p.u_bar * p.kappa**2 * s * decay
    return ux, dux


def quasi_static(params: ModelParams, dux: float) -> float:
    """Psi_xx making the centerline relaxation balance 2 du_x/dx exactly.

    Oldroyd-B: -log(1 - 2 lambda dux), +inf past the extensional limit.
    Giesekus (alpha > 0): root of h(psi) = 2 lambda dux, always finite.
    """
    q = 2.0 * params.lam * dux
    if params.model is Model.OLDROYD_B or params.alpha == 0.0:
        return -math.log1p(-q) if q < 1.0 else math.inf
    h = relaxation_function(params).h
    lo, hi = -1.0, 1.0
    while h(lo) > q:
        lo *= 2.0
    while h(hi) < q:
        hi *= 2.0
    return brentq(lambda s: h(s) - q, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass
class WakeSolution:
    xs: np.ndarray
    psi_xx: np.ndarray
    dux: np.ndarray
    ux: np.ndarray

    @property
    def sigma_xx(self) -> np.ndarray:
        return np.exp(self.psi_xx)


def default_psi0(p: WakeProfile, params: ModelParams) -> float:
    _, dux = profile_eval(p, p.x_start)
    q = quasi_static(params, dux)
    return min(max(q, PSI0_CLAMP[0]), PSI0_CLAMP[1]) if not math.isnan(q) else PSI0_CLAMP[1]


def wake_integrate(
    p: WakeProfile,
    params: ModelParams,
    psi0: Optional[float] = None,
    dx: Optional[float] = None,
) -> WakeSolution:
    """Fixed-step RK4 in x from x_start to x_end.

    Near the sphere u_x is small and the equation is stiff; a step that
    leaves the RK4 stability interval raises StepFailure rather than
    letting the oscillation masquerade as a physical blow-up.
    """
    if dx is None:
        dx = 1e-3 * p.r_sphere
    if not dx > 0:
        raise ValueError("dx must be > 0")
    if psi0 is None:
        psi0 = default_psi0(p, params)
    relax = relaxation_function(params)
    h = relax.h
    inv_lam = 1.0 / params.lam

    def rhs(x, psi):
        ux, dux = profile_eval(p, x)
        return (2.0 * dux - inv_lam * h(psi)) / ux

    if not profile_eval(p, p.x_start)[0] > 0:
        raise ValueError("u_x must be positive at x_start")
    n = int(math.ceil((p.x_end - p.x_start) / dx - 1e-9))
    xs = p.x_start + dx * np.arange(n + 1)
    psi = np.empty(n + 1)
    psi[0] = y = float(psi0)
    for k in range(n):
        x = xs[k]
        try:
            ux = profile_eval(p, x)[0]
            if dx * inv_lam * relax.h_prime(y) / ux > RK4_STABILITY:
                raise StepFailure(
                    f"dx={dx:g} exceeds the RK4 stability limit at x={x:g}; refine dx", time=x
                )
            k1 = rhs(x, y)
            k2 = rhs(x + 0.5 * dx, y + 0.5 * dx * k1)
            k3 = rhs(x + 0.5 * dx, y + 0.5 * dx * k2)
            k4 = rhs(x + dx, y + dx * k3)
        except OverflowError:
            raise _blow_up(f"Psi_xx overflowed near x={x:g}", x, _partial(p, xs, psi, k + 1)) from None
        y = y + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(y):
            raise StepFailure(f"non-finite Psi_xx at x={xs[k + 1]:g}", time=xs[k + 1])
        psi[k + 1] = y
        if y > BLOWUP_PSI:
            msg = f"Psi_xx exceeded {BLOWUP_PSI:g} at x={xs[k + 1]:g}"
            raise _blow_up(msg, xs[k + 1], _partial(p, xs, psi, k + 2))
    return _partial(p, xs, psi, n + 1)


def _partial(p, xs, psi, count) -> WakeSolution:
    xs, psi = xs[:count].copy(), psi[:count].copy()
    ux, dux = np.array([profile_eval(p, x) for x in xs]).reshape(-1, 2).T
    return WakeSolution(xs, psi, dux, ux)


def _blow_up(message, x, partial) -> BlowUp:
    """BlowUp carrying the samples computed so far as ``.partial``."""
    exc = BlowUp(message, x=x)
    exc.partial = partial
    return exc


def locate_maximum(sol: WakeSolution):
    """Interior maximum of Psi_xx refined by a parabola through three nodes.

    Returns (x*, Psi_xx(x*), dux(x*)), the latter two from the same
    quadratic interpolation.
    """
    psi = sol.psi_xx
    i = int(np.argmax(psi))
    if i == 0 or i == psi.size - 1:
        raise NoInteriorExtremum("Psi_xx attains its maximum on the boundary")
    y0, y1, y2 = psi[i - 1 : i + 2]
    curv = y0 - 2.0 * y1 + y2
    s = 0.0 if curv == 0.0 else 0.5 * (y0 - y2) / curv
    dx = sol.xs[1] - sol.xs[0]
    d0, d1, d2 = sol.dux[i - 1 : i + 2]
    psi_star = y1 + 0.5 * s * (y2 - y0) + 0.5 * s * s * curv
    dux_star = d1 + 0.5 * s * (d2 - d0) + 0.5 * s * s * (d0 - 2.0 * d1 + d2)
    return sol.xs[i] + s * dx, psi_star, dux_star


def extremal_check(sol: WakeSolution, params: ModelParams) -> float:
    """|Psi_xx(x*) - quasi-static value at x*| at the interior maximum x*.

    For Oldroyd-B this is |Psi_xx(x*) + log(1 - 2 lambda dux(x*))|; the
    stationarity of Psi_xx at x* makes it vanish up to discretization.
    """
    _, psi_star, dux_star = locate_maximum(sol)
    return abs(psi_star - quasi_static(params, dux_star))


def slope_fit(sol: WakeSolution, x_lo: float, x_hi: float) -> float:
    """Least-squares slope of Psi_xx over [x_lo, x_hi] (diagnostic only)."""
    mask = (sol.xs >= x_lo) & (sol.xs <= x_hi)
    if mask.sum() < 2:
        raise ValueError("fit window contains fewer than two samples")
    return float(np.polyfit(sol.xs[mask], sol.psi_xx[mask], 1)[0])
