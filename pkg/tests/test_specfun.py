import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from jrcmimo import specfun
from jrcmimo.errors import ConvergenceError, DomainError
from jrcmimo.specfun import (AccuracySpec, bessel_i0, bessel_k, exp_integral_e1,
                             exp_integral_ei, exp_integral_en, gen_incomplete_gamma,
                             gen_incomplete_gamma_quad, gen_incomplete_gamma_window,
                             log_bessel_k, meijer_g_capacity_kernel, scaled_e1,
                             upper_incomplete_gamma)

mpmath.mp.dps = 30


def mp_gig(q, x, b):
    """Gamma(q, x; b) at 30 digits."""
    if b == 0:
        return mpmath.gammainc(q, x)
    f = lambda t: t ** (q - 1) * mpmath.exp(-t - b / t)
    return mpmath.quad(f, [x, x + 1, x + 10, x + 100, mpmath.inf])


def test_e1_known_values():
    assert exp_integral_e1(1.0) == pytest.approx(0.21938393439552029, rel=1e-14)
    assert exp_integral_e1(0.1) == pytest.approx(1.8229239584193906, rel=1e-14)


def test_ei_and_en():
    assert exp_integral_ei(1.0) == pytest.approx(1.8951178163559368, rel=1e-14)
    assert exp_integral_en(0, 2.0) == pytest.approx(math.exp(-2.0) / 2.0, rel=1e-14)
    assert exp_integral_en(3, 0.7) == pytest.approx(float(mpmath.expint(3, 0.7)), rel=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_e1_domain(bad):
    with pytest.raises(DomainError):
        exp_integral_e1(bad)


def test_en_rejects_negative_order():
    with pytest.raises(DomainError):
        exp_integral_en(-1, 1.0)


@given(st.floats(1e-3, 700.0))
def test_e1_bounds(x):
    # 0.5 ln(1 + 2/x) < e^x E1(x) < ln(1 + 1/x)
    s = math.exp(x) * exp_integral_e1(x)
    assert 0.5 * math.log1p(2.0 / x) < s < math.log1p(1.0 / x) * (1 + 1e-12)


@pytest.mark.parametrize("y", [1e-3, 1.0, 50.0, 699.0, 701.0, 1e4, 1e8])
def test_scaled_e1(y):
    ref = float(mpmath.exp(y) * mpmath.e1(y))
    assert scaled_e1(y) == pytest.approx(ref, rel=1e-13)


def test_bessel_k_values():
    assert bessel_k(0, 1.0) == pytest.approx(0.42102443824070834, rel=1e-14)
    assert bessel_k(3, 2.5) == pytest.approx(float(mpmath.besselk(3, 2.5)), rel=1e-13)
    with pytest.raises(OverflowError):
        bessel_k(200, 1e-3)
    with pytest.raises(DomainError):
        bessel_k(0, 0.0)


@pytest.mark.parametrize("nu,y", [(0, 1e-5), (5, 0.3), (40, 1e-4), (250, 1e-6), (2, 800.0)])
def test_log_bessel_k(nu, y):
    ref = float(mpmath.log(mpmath.besselk(nu, y)))
    assert log_bessel_k(nu, y) == pytest.approx(ref, rel=1e-10)


def test_bessel_i0():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i0(2.0) == pytest.approx(float(mpmath.besseli(0, 2.0)), rel=1e-14)


@pytest.mark.parametrize("a", [2.5, 1.0, 0.0, -1.0, -3.0, -0.5, -2.7])
@pytest.mark.parametrize("x", [0.05, 1.0, 7.0])
def test_upper_incomplete_gamma(a, x):
    ref = float(mpmath.gammainc(a, x))
    assert upper_incomplete_gamma(a, x) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("q", [0, -1, -2, -5])
@pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 5.0, 20.0])
@pytest.mark.parametrize("b", [0.0, 0.5, 2.0, 10.0, 20.0])
def test_gig_grid_against_mpmath(q, x, b):
    ref = float(mp_gig(q, x, b))
    assert gen_incomplete_gamma(q, x, b) == pytest.approx(ref, rel=1e-9)


def test_gig_second_branch_regression():
    # x < sqrt(b): the complement series needs E_p(b/x), not E_p(x)
    ref = float(mp_gig(0, 0.5, 2.0))
    assert ref == pytest.approx(0.0823, abs=1e-4)
    assert gen_incomplete_gamma(0, 0.5, 2.0) == pytest.approx(ref, rel=1e-12)


def test_gig_zero_lower_limit_is_bessel():
    for q, b in ((0, 2.0), (-3, 0.7)):
        ref = 2 * b ** (q / 2) * float(mpmath.besselk(q, 2 * math.sqrt(b)))
        assert gen_incomplete_gamma(q, 0.0, b) == pytest.approx(ref, rel=1e-12)


def test_gig_domain_errors():
    with pytest.raises(DomainError):
        gen_incomplete_gamma(1, 1.0, 1.0)
    with pytest.raises(DomainError):
        gen_incomplete_gamma(-0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        gen_incomplete_gamma(0, 0.0, 0.0)
    with pytest.raises(DomainError):
        gen_incomplete_gamma(0, -1.0, 1.0)


def test_gig_term_cap_raises():
    with pytest.raises(ConvergenceError):
        gen_incomplete_gamma(0, 1.0, 40.0, AccuracySpec(max_terms=3))


def test_accuracy_spec_validation():
    with pytest.raises(ValueError):
        AccuracySpec(rel_tol=0)
    with pytest.raises(ValueError):
        AccuracySpec(max_terms=0)


@given(q=st.integers(-6, 0), x=st.floats(1e-2, 30.0), b=st.floats(0.0, 30.0))
def test_gig_positive_and_decreasing(q, x, b):
    g1 = gen_incomplete_gamma(q, x, b)
    g2 = gen_incomplete_gamma(q, x * 1.5, b)
    assert g1 > 0
    assert g2 <= g1 * (1 + 1e-9)


@given(q=st.integers(-4, -1), x=st.floats(0.05, 10.0), b=st.floats(0.05, 20.0))
def test_gig_recurrence(q, x, b):
    # integration by parts: G(q+1) = q G(q) + b G(q-1) + x^q e^{-x-b/x}
    lhs = gen_incomplete_gamma(q + 1, x, b)
    rhs = q * gen_incomplete_gamma(q, x, b) + b * gen_incomplete_gamma(q - 1, x, b) \
        + x ** q * math.exp(-x - b / x)
    assert rhs == pytest.approx(lhs, rel=1e-7)


@pytest.mark.parametrize("q,x1,x2,b", [(0, 2.3, 16.0, 300.0), (-20, 2.3, 16.0, 312.5),
                                       (-7, 0.0, 16.0, 0.01), (-3, 1.0, 2.0, 0.5)])
def test_window_against_mpmath(q, x1, x2, b):
    f = lambda t: t ** (q - 1) * mpmath.exp(-t - b / t)
    pts = [x1, (x1 + x2) / 2, x2] if x1 > 0 else [mpmath.mpf(0), min(b, x2 / 2), x2]
    ref = float(mpmath.quad(f, pts))
    assert gen_incomplete_gamma_window(q, x1, x2, b) == pytest.approx(ref, rel=1e-8)


def test_window_log_scale():
    base = gen_incomplete_gamma_window(-5, 0.0, 3.0, 0.2)
    assert gen_incomplete_gamma_window(-5, 0.0, 3.0, 0.2, log_scale=2.0) == \
        pytest.approx(base * math.exp(2.0), rel=1e-12)


def test_quad_route_matches_series():
    assert gen_incomplete_gamma_quad(-2, 1.5, math.inf, 3.0) == \
        pytest.approx(gen_incomplete_gamma(-2, 1.5, 3.0), rel=1e-10)


@pytest.mark.parametrize("z", [0.01, 0.1, 1.0, 5.0])
def test_meijer_kernel_against_mpmath(z):
    ref = float(mpmath.meijerg([[-1], []], [[-1, -1, 0], []], z))
    assert meijer_g_capacity_kernel(z) == pytest.approx(ref, rel=1e-9)


def test_meijer_kernel_domain():
    with pytest.raises(DomainError):
        meijer_g_capacity_kernel(0.0)


def test_log_expn_negative_orders():
    z = 3.0
    got = specfun._log_expn(np.array([-2, 0, 4]), z)
    ref = [float(mpmath.log(mpmath.expint(p, z))) for p in (-2, 0, 4)]
    assert np.allclose(got, ref, rtol=1e-12)
