import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from casimir_pm.errors import DomainError
from casimir_pm.specfun import (ScaledValue, bessel_i, bessel_i_prime, bessel_k, bessel_k_prime,
                                log_bessel_ik, log_bessel_ike, log_bessel_ike_prime)

EULER_GAMMA = 0.5772156649015329


def test_i0_small_argument_limit():
    assert bessel_i(0, 1e-12).value == pytest.approx(1.0, rel=1e-12)


def test_i1_power_series():
    x = 0.1
    series = math.fsum((x / 2) ** (2 * k + 1) / (math.factorial(k) * math.factorial(k + 1))
                       for k in range(12))
    assert bessel_i(1, x).value == pytest.approx(series, rel=1e-14)


def test_k0_small_argument_expansion():
    x = 1e-6
    assert bessel_k(0, x).value == pytest.approx(-math.log(x / 2) - EULER_GAMMA, abs=1e-9)


def test_k0_large_argument_asymptotics():
    x = 50.0
    val = bessel_k(0, x)
    asym = math.sqrt(math.pi / (2 * x)) * (1 - 1 / (8 * x) + 9 / (128 * x * x))
    assert val.log_abs + x == pytest.approx(math.log(asym), abs=1e-6)


@pytest.mark.parametrize("m", [0, 5, 50])
@pytest.mark.parametrize("x", [0.5, 5.0, 50.0])
def test_wronskian_spot_values(m, x):
    lhs = bessel_i(m, x) * bessel_k(m + 1, x)
    rhs = bessel_i(m + 1, x) * bessel_k(m, x)
    total = lhs.value + rhs.value
    assert total * x == pytest.approx(1.0, rel=1e-12)


def test_wronskian_grid():
    x = np.logspace(-3, 3, 61)
    log_ie, log_ke = log_bessel_ike(101, x)
    # I_m K_{m+1} + I_{m+1} K_m in scaled form (the e^{+-x} cancel)
    w = np.exp(log_ie[:, :-1] + log_ke[:, 1:]) + np.exp(log_ie[:, 1:] + log_ke[:, :-1])
    np.testing.assert_allclose(w * x[:, None], 1.0, rtol=1e-12)


def test_against_scipy_scaled():
    x = np.logspace(-2, 3, 40)
    m = np.arange(0, 60)
    log_ie, log_ke = log_bessel_ike(59, x)
    ref_i = special.ive(m[None, :], x[:, None])
    ref_k = special.kve(m[None, :], x[:, None])
    ok = (ref_i > 1e-300) & np.isfinite(ref_k) & (ref_k < 1e300)
    np.testing.assert_allclose(np.exp(log_ie)[ok], ref_i[ok], rtol=1e-12)
    np.testing.assert_allclose(np.exp(log_ke)[ok], ref_k[ok], rtol=1e-12)


@pytest.mark.parametrize("m, x", [(5, 700.0), (0, 1e4), (30, 1e-3), (120, 3.0)])
def test_against_mpmath_extreme(m, x):
    mp.mp.dps = 30
    li, lk = log_bessel_ik(m, np.array([x]))
    ref_i = float(mp.log(mp.besseli(m, mp.mpf(x))))
    ref_k = float(mp.log(mp.besselk(m, mp.mpf(x))))
    assert li[0, m] == pytest.approx(ref_i, rel=1e-13, abs=1e-12)
    assert lk[0, m] == pytest.approx(ref_k, rel=1e-13, abs=1e-12)


def test_large_argument_no_overflow():
    v = bessel_i(5, 1e4)
    assert np.isfinite(v.mantissa) and 1.0 <= abs(v.mantissa) < math.e
    assert v.exponent > 9000
    assert bessel_k(5, 1e4).exponent < -9000


def test_scaled_round_trip_moderate():
    for m, x in [(0, 0.3), (7, 4.0), (20, 30.0)]:
        assert bessel_i(m, x).value == pytest.approx(special.iv(m, x), rel=1e-13)
        assert bessel_k(m, x).value == pytest.approx(special.kv(m, x), rel=1e-13)


@pytest.mark.parametrize("x", [0.5, 5.0])
def test_derivative_identities(x):
    assert bessel_i_prime(0, x).value == pytest.approx(bessel_i(1, x).value, rel=1e-14)
    assert bessel_k_prime(0, x).value == pytest.approx(-bessel_k(1, x).value, rel=1e-14)


def test_derivative_finite_difference():
    h = 1e-5
    fd_i = (bessel_i(3, 2 + h).value - bessel_i(3, 2 - h).value) / (2 * h)
    fd_k = (bessel_k(3, 2 + h).value - bessel_k(3, 2 - h).value) / (2 * h)
    assert bessel_i_prime(3, 2.0).value == pytest.approx(fd_i, rel=1e-8)
    assert bessel_k_prime(3, 2.0).value == pytest.approx(fd_k, rel=1e-8)


def test_derivative_table_against_scipy():
    x = np.array([0.01, 0.7, 9.0, 80.0])
    _, _, log_ipe, log_kpe = log_bessel_ike_prime(40, x)
    m = np.arange(41)
    np.testing.assert_allclose(np.exp(log_ipe), special.ivp(m, x[:, None]) * np.exp(-x[:, None]),
                               rtol=1e-12)
    ref_k = -special.kvp(m, x[:, None]) * np.exp(x[:, None])
    ok = np.isfinite(ref_k)
    np.testing.assert_allclose(np.exp(log_kpe)[ok], ref_k[ok], rtol=1e-12)


def test_negative_orders_reflect():
    assert bessel_i(-4, 2.5) == bessel_i(4, 2.5)
    assert bessel_k(-4, 2.5) == bessel_k(4, 2.5)


@pytest.mark.parametrize("x", [0.0, -1.0, np.nan, np.inf])
def test_domain_errors_on_argument(x):
    with pytest.raises(DomainError):
        bessel_i(1, x)


def test_domain_error_on_order():
    with pytest.raises(DomainError):
        bessel_k(300, 1.0)
    assert bessel_k(300, 1.0, m_max=400).log_abs > 0


def test_monotonic_in_x():
    x = np.linspace(0.1, 40, 200)
    li, lk = log_bessel_ik(20, x)
    assert np.all(np.diff(li, axis=0) > 0)
    assert np.all(np.diff(lk, axis=0) < 0)


class TestScaledValue:
    def test_normalization(self):
        v = ScaledValue.from_log(1234.5, -1.0)
        assert 1.0 <= abs(v.mantissa) < math.e
        assert v.sign == -1.0
        assert v.log_abs == pytest.approx(1234.5)

    def test_arithmetic(self):
        a = ScaledValue.from_log(math.log(3.0))
        b = ScaledValue.from_log(math.log(4.0), -1.0)
        assert (a * b).value == pytest.approx(-12.0)
        assert (a / b).value == pytest.approx(-0.75)
        assert (-a).value == pytest.approx(-3.0)

    def test_zero(self):
        z = ScaledValue.from_log(-math.inf)
        assert z.value == 0.0 and z.log_abs == -math.inf
        with pytest.raises(ZeroDivisionError):
            ScaledValue.from_log(0.0) / z

    @given(st.floats(-700, 700), st.floats(-700, 700))
    def test_product_adds_logs(self, la, lb):
        p = ScaledValue.from_log(la) * ScaledValue.from_log(lb)
        assert p.log_abs == pytest.approx(la + lb, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(0, 100), logx=st.floats(-3, 3))
def test_wronskian_property(m, logx):
    x = 10.0 ** logx
    li, lk = log_bessel_ike(m + 1, np.array([x]))
    w = math.exp(li[0, m] + lk[0, m + 1]) + math.exp(li[0, m + 1] + lk[0, m])
    assert w * x == pytest.approx(1.0, rel=1e-12)
