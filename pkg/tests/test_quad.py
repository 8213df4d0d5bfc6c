import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hadamard.expr import compile_expr
from hadamard.quad import (
    DomainFaultError,
    Interval,
    NonConvergenceError,
    integral_mean,
    integrate,
    integrate_symmetric_product,
)

UNIT = Interval(0.0, 1.0)


def test_interval_rejects_degenerate_and_reversed():
    for a, b in ((1.0, 1.0), (2.0, 1.0), (0.0, math.inf), (math.nan, 1.0)):
        with pytest.raises(ValueError):
            Interval(a, b)


def test_midpoint_large_endpoints():
    iv = Interval(1e308, 1.5e308)
    assert iv.midpoint == 1.25e308


def test_exp_on_unit():
    r = integrate(compile_expr("exp(x)"), UNIT, 1e-12)
    assert r.value == pytest.approx(math.e - 1, rel=1e-14)
    assert 0 <= r.err_estimate < 1e-12


def test_square_on_0_2():
    r = integrate(compile_expr("x^2"), Interval(0, 2), 1e-12)
    assert r.value == pytest.approx(8 / 3, rel=1e-14)


@pytest.mark.parametrize("degree", range(10))
def test_polynomials_exact_without_refinement(degree):
    rng = np.random.default_rng(degree)
    coeffs = rng.uniform(-2, 2, degree + 1)
    iv = Interval(-0.7, 1.9)
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(iv.b) - poly.integ()(iv.a)
    r = integrate(poly, iv, 1e-12)
    assert r.subdivisions == 0
    assert abs(r.value - exact) <= 1e-12 * max(abs(exact), 1.0)


def test_sqrt_endpoint_singularity_converges():
    r = integrate(compile_expr("sqrt(x)"), UNIT, 1e-10)
    assert r.value == pytest.approx(2 / 3, rel=1e-10)


def test_domain_fault_names_abscissa():
    with pytest.raises(DomainFaultError) as info:
        integrate(compile_expr("log(x-0.5)"), UNIT)
    assert 0.0 <= info.value.abscissa <= 0.5


def test_non_convergence_carries_best_value():
    with pytest.raises(NonConvergenceError) as info:
        integrate(compile_expr("abs(x-0.3)^0.01*(1+x)"), UNIT, 1e-14, max_depth=3)
    assert math.isfinite(info.value.best.value)


def test_rel_tol_range():
    f = compile_expr("x")
    for bad in (1e-15, 0.1):
        with pytest.raises(ValueError):
            integrate(f, UNIT, bad)


def test_integral_mean_divides_width():
    mean, res = integral_mean(compile_expr("x^2"), Interval(0, 2))
    assert mean == pytest.approx(4 / 3, rel=1e-14)
    assert res.value == pytest.approx(8 / 3, rel=1e-14)


@pytest.mark.parametrize(
    "f, g, expected",
    [("exp(x)", "exp(x)", 2 * math.e), ("1", "1", 2.0), ("exp(x)", "1", math.e + 1)],
)
def test_symmetric_product_examples(f, g, expected):
    r = integrate_symmetric_product(compile_expr(f), compile_expr(g), UNIT, 1e-12)
    assert r.value == pytest.approx(expected, rel=1e-13)


FNS = ["exp(x)", "exp(0.8*x^2-0.3*x)", "1/(1+x^2)", "sqrt(x+1)", "(3-x)^4"]
ends = st.floats(min_value=0.1, max_value=2.5, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FNS), ends, ends, st.floats(min_value=0.05, max_value=0.95))
def test_additivity(src, p, q, frac):
    a, b = min(p, q), max(p, q)
    if b - a < 1e-3:
        return
    c = a + frac * (b - a)
    f = compile_expr(src)
    whole = integrate(f, Interval(a, b), 1e-12)
    left, right = integrate(f, Interval(a, c), 1e-12), integrate(f, Interval(c, b), 1e-12)
    tol = max(1e-11 * abs(whole.value), whole.err_estimate + left.err_estimate + right.err_estimate)
    assert abs(left.value + right.value - whole.value) <= tol


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FNS), st.sampled_from(FNS), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(fs, gs, alpha, beta):
    f, g = compile_expr(fs), compile_expr(gs)
    iv = Interval(0.2, 1.7)
    combo = integrate(lambda x: alpha * f(x) + beta * g(x), iv, 1e-12).value
    parts = alpha * integrate(f, iv, 1e-12).value + beta * integrate(g, iv, 1e-12).value
    scale = abs(alpha) * integrate(lambda x: np.abs(f(x)), iv).value + abs(beta) * integrate(
        lambda x: np.abs(g(x)), iv
    ).value
    assert abs(combo - parts) <= 1e-11 * max(scale, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FNS), st.sampled_from(FNS), ends, ends)
def test_symmetric_product_reflection(fs, gs, p, q):
    a, b = min(p, q), max(p, q)
    if b - a < 1e-3:
        return
    f, g = compile_expr(fs), compile_expr(gs)
    iv = Interval(a, b)
    direct = integrate_symmetric_product(f, g, iv, 1e-12).value
    # reflect both factors through the midpoint
    fr, gr = (lambda x: f(a + b - x)), (lambda x: g(a + b - x))
    reflected = integrate_symmetric_product(fr, gr, iv, 1e-12).value
    assert reflected == pytest.approx(direct, rel=1e-12)
