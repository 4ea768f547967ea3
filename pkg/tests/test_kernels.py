import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import series_reference as ref
from logconf import kernels
from logconf.errors import KernelOverflow, NonFinite, PreconditionViolated
from logconf.kernels import (
    DEFAULT_THRESHOLDS,
    KernelThresholds,
    bernoulli_even,
    dd_exp,
    divided_diff,
    f_deriv,
    f_eval,
    f_series_coefficients,
    f_third,
    g_deriv,
    g_eval,
    g_third,
    three_eig_factor,
)

GRID = np.linspace(-3.0, 3.0, 601)
finite = st.floats(-30, 30, allow_nan=False)


def rel(a, b, floor=1e-300):
    return abs(a - b) / max(abs(b), floor)


def test_thresholds_defaults_and_validation():
    t = KernelThresholds()
    assert (t.dd_f_switch, t.dd_g_switch, t.deriv_f_switch, t.deriv_g_switch) == (1e-2, 1e-3, 1e-1, 1e-3)
    with pytest.raises(ValueError):
        KernelThresholds(dd_f_switch=0.0)
    with pytest.raises(ValueError):
        KernelThresholds(deriv_g_switch=-1.0)


# --- f ------------------------------------------------------------------

def test_f_examples():
    assert f_eval(0.0) == 2.0
    assert f_eval(0.7) == f_eval(-0.7)
    assert f_eval(1.0) == pytest.approx(2.163953413738653, rel=1e-15)


def test_f_matches_series_oracle_on_grid():
    for x in GRID:
        assert rel(f_eval(x), ref.f(x)) <= 1e-10


@given(finite)
def test_f_is_at_least_two(x):
    assert f_eval(x) >= 2.0


def test_f_deriv_examples():
    assert f_deriv(0.0) == 0.0
    assert f_deriv(-0.05) == -f_deriv(0.05)
    fd = (f_eval(1.0 + 1e-6) - f_eval(1.0 - 1e-6)) / 2e-6
    assert abs(f_deriv(1.0) - fd) <= 1e-8


def test_f_derivatives_match_series_oracle():
    for x in GRID:
        assert abs(f_deriv(x) - ref.f(x, 1)) <= 1e-10 * max(1.0, abs(ref.f(x, 1)))
        assert abs(f_third(x) - ref.f(x, 3)) <= 1e-10 * max(1.0, abs(ref.f(x, 3)))


def test_f_series_branch_accuracy():
    # the small-argument polynomials are good to far better than 1e-10
    for x in np.linspace(-0.1, 0.1, 41):
        assert abs(f_eval(x) - ref.f(x)) <= 1e-12 * ref.f(x)
        assert abs(f_deriv(x) - ref.f(x, 1)) <= 1e-12


# --- g ------------------------------------------------------------------

def test_g_examples():
    assert g_eval(0.0) == 1.0
    assert g_eval(1.0) == pytest.approx(1.718281828459045, rel=1e-15)
    assert abs(g_eval(1e-8) - (1.0 + 5e-9)) <= 1e-18


def test_g_matches_series_oracle_on_grid():
    for x in GRID:
        assert rel(g_eval(x), ref.g(x)) <= 1e-10
        assert rel(g_deriv(x), ref.g(x, 1)) <= 1e-10
        assert rel(g_third(x), ref.g(x, 3)) <= 1e-10


def test_g_far_field():
    assert g_eval(-800.0) == pytest.approx(1 / 800.0, rel=1e-15)
    assert g_eval(50.0) == pytest.approx(math.expm1(50.0) / 50.0, rel=1e-14)
    with pytest.raises(KernelOverflow):
        g_eval(1000.0)
    with pytest.raises(OverflowError):
        g_eval(710.0)


def test_g_third_closed_form_branch():
    for x in (4.5, 10.0, -6.0):
        # g'''(x) = int_0^1 t^3 e^(xt) dt, by Gauss-Legendre
        t, w = np.polynomial.legendre.leggauss(40)
        t, w = 0.5 * (t + 1), 0.5 * w
        assert rel(g_third(x), float(np.sum(w * t**3 * np.exp(x * t)))) <= 1e-12


# --- divided differences --------------------------------------------

def test_divided_diff_examples():
    assert divided_diff("f", 0.0, 0.0) == 0.0
    fd = (g_eval(0.1 + 1e-6) - g_eval(0.1 - 1e-6)) / 2e-6
    assert abs(divided_diff("g", 0.1, 0.1) - fd) <= 1e-8
    assert divided_diff("f", 1.0, 0.2) == (f_eval(1.0) - f_eval(0.2)) / (1.0 - 0.2)


@pytest.mark.parametrize("kernel", ["f", "g"])
def test_divided_diff_matches_series_oracle(kernel, rng):
    pts = list(rng.uniform(-3, 3, (300, 2)))
    for gap in (0.0, 1e-12, 1e-6, 5e-4, 2e-3, 9e-3, 1.1e-2, 0.3):
        pts += [(m + gap / 2, m - gap / 2) for m in np.linspace(-2.9, 2.9, 15)]
    for x, y in pts:
        # f' is odd, so divided differences of f centred on 0 vanish
        assert rel(divided_diff(kernel, x, y), ref.divided_difference(kernel, x, y), 1e-9) <= 1e-10


@pytest.mark.parametrize("kernel", ["f", "g"])
@given(x=st.floats(-5, 5), y=st.floats(-5, 5))
def test_divided_diff_symmetric(kernel, x, y):
    assert divided_diff(kernel, x, y) == pytest.approx(divided_diff(kernel, y, x), rel=1e-14, abs=1e-300)


@pytest.mark.parametrize(
    "kernel,switch", [("f", DEFAULT_THRESHOLDS.dd_f_switch), ("g", DEFAULT_THRESHOLDS.dd_g_switch)]
)
def test_divided_diff_continuous_at_switch(kernel, switch):
    for m in np.linspace(-3, 3, 100):
        below = divided_diff(kernel, m + 0.5 * (switch - 1e-12), m - 0.5 * (switch - 1e-12))
        above = divided_diff(kernel, m + 0.5 * (switch + 1e-12), m - 0.5 * (switch + 1e-12))
        assert abs(below - above) <= 1e-9 * max(abs(above), 1e-300)


@pytest.mark.parametrize(
    "fn,switch",
    [(f_deriv, DEFAULT_THRESHOLDS.deriv_f_switch), (g_deriv, DEFAULT_THRESHOLDS.deriv_g_switch),
     (f_third, DEFAULT_THRESHOLDS.deriv_f_switch), (g_third, DEFAULT_THRESHOLDS.deriv_g_switch)],
)
def test_derivative_branches_continuous(fn, switch):
    for s in (switch, -switch):
        a, b = fn(s * (1 - 1e-12)), fn(s * (1 + 1e-12))
        assert abs(a - b) <= 1e-9 * max(abs(a), abs(b))


def test_custom_thresholds_move_the_switch():
    th = KernelThresholds(dd_f_switch=0.5)
    x, y = 1.2, 1.0
    quotient = (f_eval(x) - f_eval(y)) / (x - y)
    assert divided_diff("f", x, y) == quotient
    assert divided_diff("f", x, y, th) != quotient
    assert rel(divided_diff("f", x, y, th), quotient) < 1e-4


def test_divided_diff_errors():
    with pytest.raises(ValueError):
        divided_diff("h", 0.0, 1.0)
    with pytest.raises(NonFinite):
        divided_diff("f", math.nan, 1.0)
    with pytest.raises(NonFinite):
        divided_diff("g", 0.0, math.inf)
    with pytest.raises(NonFinite):
        f_eval(math.inf)


# --- three-eigenvalue factor ---------------------------------------

def naive_three(a, b, c):
    return (
        math.exp(a) / ((a - b) * (a - c))
        + math.exp(b) / ((b - a) * (b - c))
        + math.exp(c) / ((c - a) * (c - b))
    )


def test_three_eig_factor_examples():
    assert three_eig_factor(0.0, 0.0, 0.0) == pytest.approx(0.5, rel=1e-15)
    assert rel(three_eig_factor(1.0, 2.0, 3.0), naive_three(1.0, 2.0, 3.0)) <= 1e-12
    assert three_eig_factor(1.0, 2.0, 3.0) == three_eig_factor(3.0, 1.0, 2.0)


def test_three_eig_factor_matches_series_oracle(rng):
    pts = list(rng.uniform(-3, 3, (300, 3)))
    for m in np.linspace(-3, 3, 13):
        pts += [(m, m, m), (m, m, m + 1e-7), (m, m + 1e-3, m - 2e-3), (m, m + 0.01, m + 0.5)]
    for a, b, c in pts:
        assert rel(three_eig_factor(a, b, c), ref.exp_second_divided_difference(a, b, c)) <= 1e-10


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.permutations(range(3)))
def test_three_eig_factor_permutation_invariant(vals, perm):
    assert three_eig_factor(*vals) == three_eig_factor(*[vals[i] for i in perm])


def test_three_eig_factor_coalescence_is_cauchy():
    base, other = 0.4, -1.1
    vals = [three_eig_factor(base, base + 10.0**-k, other) for k in range(1, 15)]
    diffs = np.abs(np.diff(vals))
    assert diffs[-1] < 1e-13
    assert np.all(diffs[4:] <= diffs[3] * 1.0001)
    limit = ref.exp_second_divided_difference(base, base, other)
    assert rel(vals[-1], limit) < 1e-12


# --- bernoulli and helpers -------------------------------------------

def test_bernoulli_values():
    assert bernoulli_even(0) == 1.0
    assert bernoulli_even(1) == 1 / 6
    assert bernoulli_even(2) == -1 / 30
    for n in range(33):
        assert bernoulli_even(n) == float(ref.bernoulli(2 * n))
    with pytest.raises(PreconditionViolated):
        bernoulli_even(33)
    with pytest.raises(PreconditionViolated):
        bernoulli_even(-1)


def test_series_coefficients_extend_past_table():
    c = f_series_coefficients(200)
    assert c[:3] == (2.0, 1 / 6, -1 / 360)
    assert all(math.isfinite(v) for v in c)
    assert c[150] == float(2 * ref.bernoulli(300) / math.factorial(300))


def test_dd_exp_against_explicit_sinh_form(rng):
    for a, b in rng.uniform(-20, 20, (500, 2)):
        d = 0.5 * (a - b)
        explicit = math.exp(0.5 * a) * math.exp(0.5 * b) * math.sinh(d) / d
        assert rel(dd_exp(a, b), explicit) <= 1e-15
    assert dd_exp(1.3, 1.3) == math.exp(0.65) * math.exp(0.65)


@given(finite, finite, finite)
def test_kernels_finite_on_bounded_inputs(x, y, z):
    for v in (f_eval(x), f_deriv(x), f_third(x), g_eval(x), g_deriv(x), g_third(x),
              divided_diff("f", x, y), divided_diff("g", x, y), three_eig_factor(x, y, z)):
        assert math.isfinite(v)


def test_module_constants():
    assert kernels.BERNOULLI_MAX_INDEX == 32
