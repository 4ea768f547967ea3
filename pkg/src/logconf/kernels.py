"""Scalar kernels behind the spectral formulas.

``f(x) = x / tanh(x/2)`` weights the strain term, ``g(x) = (e^x - 1)/x``
builds the second divided difference of ``exp``.  Near removable
singularities both are replaced by short Taylor polynomials; the switch
points live in :class:`KernelThresholds`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal

from .errors import KernelOverflow, NonFinite, PreconditionViolated

BERNOULLI_MAX_INDEX = 32
# below this |x| f is evaluated from its even series (terms through x^8)
F_SERIES_SWITCH = 1e-1
# beyond this |x| coth(x/2) == sign(x) and csch^2(x/2) underflows to noise
_F_ASYMPTOTIC = 60.0
_G_SERIES_RANGE = 4.0


@dataclass(frozen=True)
class KernelThresholds:
    dd_f_switch: float = 1e-2
    dd_g_switch: float = 1e-3
    deriv_f_switch: float = 1e-1
    deriv_g_switch: float = 1e-3

    def __post_init__(self):
        for name in ("dd_f_switch", "dd_g_switch", "deriv_f_switch", "deriv_g_switch"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_THRESHOLDS = KernelThresholds()


@lru_cache(maxsize=None)
def _bernoulli_even_table(n: int) -> tuple:
    """Exact B_0, B_2, ..., B_2n from the binomial recurrence.

    sum_{r=0}^{m} C(m+1, r) B_r = 0 with B_1 = -1/2 and odd B_r = 0 (r >= 3).
    """
    table = [Fraction(1)]
    for k in range(1, n + 1):
        m = 2 * k
        s = Fraction(-(m + 1), 2)  # the B_1 term
        for j in range(k):
            s += math.comb(m + 1, 2 * j) * table[j]
        table.append(-s / (m + 1))
    return tuple(table)


def bernoulli_even(n: int) -> float:
    """B_{2n} as a float, for 0 <= n <= 32."""
    if not 0 <= n <= BERNOULLI_MAX_INDEX:
        raise PreconditionViolated(f"bernoulli_even supports 0 <= n <= {BERNOULLI_MAX_INDEX}, got {n}")
    return float(_bernoulli_even_table(n)[n])


@lru_cache(maxsize=None)
def f_series_coefficients(n_terms: int) -> tuple:
    """Coefficients c_n = 2 B_2n / (2n)! of f(x) = sum_n c_n x^(2n).

    Converted from exact rationals, so large n neither overflows nor
    loses accuracy (unlike B_2n and (2n)! taken separately).
    """
    table = _bernoulli_even_table(n_terms - 1)
    return tuple(float(2 * b / math.factorial(2 * k)) for k, b in enumerate(table))


_FC = f_series_coefficients(8)


def _finite(x, name="x"):
    if not math.isfinite(x):
        raise NonFinite(f"{name} must be finite, got {x!r}")


def f_eval(x: float) -> float:
    _finite(x)
    if abs(x) < F_SERIES_SWITCH:
        x2 = x * x
        return _FC[0] + x2 * (_FC[1] + x2 * (_FC[2] + x2 * (_FC[3] + x2 * _FC[4])))
    return x / math.tanh(0.5 * x)


def f_deriv(x: float, thresholds: KernelThresholds = DEFAULT_THRESHOLDS) -> float:
    _finite(x)
    if abs(x) < thresholds.deriv_f_switch:
        x2 = x * x
        return x * (
            2 * _FC[1] + x2 * (4 * _FC[2] + x2 * (6 * _FC[3] + x2 * (8 * _FC[4] + x2 * 10 * _FC[5])))
        )
    if abs(x) > _F_ASYMPTOTIC:
        return math.copysign(1.0, x)
    sh = math.sinh(0.5 * x)
    return 1.0 / math.tanh(0.5 * x) - 0.5 * x / (sh * sh)


def f_third(x: float, thresholds: KernelThresholds = DEFAULT_THRESHOLDS) -> float:
    _finite(x)
    if abs(x) < thresholds.deriv_f_switch:
        x2 = x * x
        return x * (24 * _FC[2] + x2 * (120 * _FC[3] + x2 * (336 * _FC[4] + x2 * 720 * _FC[5])))
    if abs(x) > _F_ASYMPTOTIC:
        return 0.0
    c = 1.0 / math.tanh(0.5 * x)
    sh = math.sinh(0.5 * x)
    s = 1.0 / (sh * sh)
    return 1.5 * c * s - 0.5 * x * s * (1.0 + 1.5 * s)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise KernelOverflow(f"exp({x}) is not representable") from None


def g_eval(x: float) -> float:
    """(e^x - 1)/x evaluated as (y - 1)/log(y) with y = e^x."""
    _finite(x)
    y = _exp(x)
    if y == 1.0:
        return 1.0
    if y == 0.0:
        return -1.0 / x
    return (y - 1.0) / math.log(y)


def g_deriv(x: float, thresholds: KernelThresholds = DEFAULT_THRESHOLDS) -> float:
    _finite(x)
    if abs(x) < thresholds.deriv_g_switch:
        return 0.5 + x * (1.0 / 3.0 + x * (0.125 + x / 30.0))
    return (_exp(x) - g_eval(x)) / x


def g_third(x: float, thresholds: KernelThresholds = DEFAULT_THRESHOLDS) -> float:
    _finite(x)
    if abs(x) < thresholds.deriv_g_switch:
        return 0.25 + x * (0.2 + x * (1.0 / 12.0 + x / 42.0))
    if abs(x) <= _G_SERIES_RANGE:
        # g'''(x) = int_0^1 t^3 e^(xt) dt = sum_n x^n / (n! (n + 4))
        total, term, n = 0.0, 1.0, 0
        while True:
            contrib = term / (n + 4)
            total += contrib
            if abs(contrib) <= 1e-18 * abs(total) and n > 4:
                return total
            n += 1
            term *= x / n
    ex = _exp(x)
    return (ex * (x * (x * (x - 3.0) + 6.0) - 6.0) + 6.0) / x**4


_KERNELS = {
    "f": (f_eval, f_deriv, f_third, "dd_f_switch"),
    "g": (g_eval, g_deriv, g_third, "dd_g_switch"),
}


def divided_diff(
    kernel: Literal["f", "g"],
    x: float,
    y: float,
    thresholds: KernelThresholds = DEFAULT_THRESHOLDS,
) -> float:
    """First divided difference (k(x) - k(y))/(x - y) of kernel f or g.

    Close to the diagonal the midpoint expansion
    k'(m) + (x - y)^2 / 24 * k'''(m) replaces the quotient.
    """
    try:
        k, k1, k3, switch = _KERNELS[kernel]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; expected 'f' or 'g'") from None
    _finite(x)
    _finite(y, "y")
    h = x - y
    if abs(h) >= getattr(thresholds, switch):
        return (k(x) - k(y)) / h
    m = 0.5 * (x + y)
    return k1(m, thresholds) + h * h / 24.0 * k3(m, thresholds)


def three_eig_factor(
    li: float, lj: float, lk: float, thresholds: KernelThresholds = DEFAULT_THRESHOLDS
) -> float:
    """Second divided difference of exp at three (possibly equal) points.

    Uses the cancellation-free rewrite in terms of g and its divided
    differences.  Arguments are sorted first, which makes the result
    exactly permutation invariant.
    """
    for v in (li, lj, lk):
        _finite(v)
    a, b, c = sorted((li, lj, lk), reverse=True)
    x = (a - b) / 3.0
    y = (a - c) / 3.0
    z = (b - c) / 3.0
    gx, gy, gz = g_eval(x), g_eval(y), g_eval(z)
    gmx, gmy, gmz = g_eval(-x), g_eval(-y), g_eval(-z)
    bracket = (
        gx * gy
        + gmx * gz
        + gmy * gmz
        + divided_diff("g", -x, -y, thresholds)
        + divided_diff("g", x, -z, thresholds)
        + divided_diff("g", y, z, thresholds)
    )
    return _exp((a + b + c) / 3.0) * bracket / 9.0


def dd_exp(a: float, b: float) -> float:
    """(e^a - e^b)/(a - b) in the e^(a/2) e^(b/2) sinh(d)/d form, d = (a - b)/2."""
    d = 0.5 * (a - b)
    scale = _exp(0.5 * a) * _exp(0.5 * b)
    if d == 0.0:
        return scale
    return scale * (math.sinh(d) / d)
