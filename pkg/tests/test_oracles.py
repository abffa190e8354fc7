import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from casimir_pm.oracles import (TABLE1_CASES, b_nu, concentric_log_q, concentric_mode_cutoff,
                                concentric_te, concentric_tm, d_m, perturbative_amplitude,
                                pfa_energy, table1)

# scipy iv/kv + quad, frozen
B3_THIRD = 0.7847183846965391
B5_THIRD = 0.5280611273091986
B3_FIVE_NINTHS = 0.4701997687923169
# mpmath, 30 digits
D2_AT = (0.3, 1.5, 0.891456859142089768)


def test_concentric_tm_frozen():
    assert concentric_tm(1.0, 2.0) == pytest.approx(-0.0620739916529662, rel=1e-9)
    assert concentric_tm(1.0, 2.0, m_max=10) == pytest.approx(-0.06207378767846114, rel=1e-9)
    assert concentric_tm(1.0, 3.0) == pytest.approx(-0.00985132847683664, rel=1e-9)


def test_concentric_te_frozen():
    assert concentric_te(1.0, 2.0) == pytest.approx(-0.050357504985838575, rel=1e-9)


def test_concentric_log_q_against_scipy():
    y, a, b = 0.8, 1.0, 2.5
    m = np.arange(-40, 41)
    ref = np.sum(np.log1p(-special.iv(m, y * a) * special.kv(m, y * b)
                          / (special.iv(m, y * b) * special.kv(m, y * a))))
    assert concentric_log_q(y, a, b)[0] == pytest.approx(ref, rel=1e-12)


def test_mode_cutoff_grows_near_contact():
    assert concentric_mode_cutoff(1.0, 1.05) > concentric_mode_cutoff(1.0, 2.0) > 10


@pytest.mark.parametrize("a, b", [(1.0, 1.5), (1.0, 4.0)])
def test_scale_covariance(a, b):
    assert concentric_tm(2 * a, 2 * b) * 4 == pytest.approx(concentric_tm(a, b), rel=1e-9)


def test_d_m_value_and_symmetry():
    y, x, ref = D2_AT
    assert d_m(y, x, 2) == pytest.approx(ref, rel=1e-13)
    assert d_m(y, x, -2) == d_m(y, x, 2)


@settings(max_examples=30, deadline=None)
@given(y=st.floats(0.05, 0.95), x=st.floats(0.01, 30.0), m=st.integers(0, 20))
def test_d_m_positive_and_matches_scipy(y, x, m):
    val = d_m(y, x, m)
    assert val > 0
    u, v = x * (1 + y), x * (1 - y)
    ref = special.iv(m, u) * special.kv(m, v) - special.iv(m, v) * special.kv(m, u)
    if np.isfinite(ref) and 1e-250 < ref < 1e250 and ref > 1e-6 * special.iv(m, u) * special.kv(m, v):
        assert val == pytest.approx(ref, rel=1e-9)


def test_d_m_small_x_limit():
    # leading order: ((1+y)^m (1-y)^-m - (1-y)^m (1+y)^-m) / (2m)
    y, m, x = 0.4, 3, 1e-4
    lead = (((1 + y) / (1 - y)) ** m - ((1 - y) / (1 + y)) ** m) / (2 * m)
    assert d_m(y, x, m) == pytest.approx(lead, rel=1e-6)


def test_d_m_domain():
    with pytest.raises(ValueError):
        d_m(1.2, 1.0, 0)


def test_b_nu_frozen():
    assert b_nu(3, 1 / 3).value == pytest.approx(B3_THIRD, rel=1e-8)
    assert b_nu(5, 1 / 3).value == pytest.approx(B5_THIRD, rel=1e-8)
    assert b_nu(3, 5 / 9).value == pytest.approx(B3_FIVE_NINTHS, rel=1e-8)


def test_b_nu_against_direct_quadrature():
    nu, y = 2, 0.5
    u = lambda x: x * (1 + y)  # noqa: E731
    v = lambda x: x * (1 - y)  # noqa: E731

    def dm(m, x):
        return special.iv(m, u(x)) * special.kv(m, v(x)) - special.iv(m, v(x)) * special.kv(m, u(x))

    def term(m):
        return integrate.quad(lambda x: x / (dm(m, x) * dm(m + nu, x)), 0, 60,
                              epsabs=0, epsrel=1e-11, limit=200)[0]

    total = math.fsum(term(m) for m in range(-40, 39))
    pref = 15 / math.pi ** 4 * 8 * y ** 3 * 4 * y * y / (1 - y * y)
    assert b_nu(nu, y).value == pytest.approx(pref * total, rel=1e-7)


def test_b_nu_decreases_with_nu():
    vals = [b_nu(nu, 0.4).value for nu in (1, 2, 3, 5, 8)]
    assert all(np.diff(vals) < 0)


def test_b_nu_reports_tail():
    res = b_nu(3, 1 / 3)
    assert 0 <= res.m_tail < 1e-9 * res.value
    assert res.x_error < 1e-8 * res.value


def test_amplitude_quadratic_in_h():
    a1 = perturbative_amplitude(3, 2.0, 0.01)
    a2 = perturbative_amplitude(3, 2.0, 0.02)
    assert a2 == pytest.approx(4 * a1, rel=1e-12)


def test_amplitude_warns_outside_small_regime():
    with pytest.warns(RuntimeWarning):
        perturbative_amplitude(3, 2.0, 0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        perturbative_amplitude(3, 2.0, 0.05)


def test_amplitude_scale_covariance():
    # h and a both doubled: A(a) ~ 1/a^2
    assert perturbative_amplitude(3, 2.0, 0.02, a=2.0) * 4 == pytest.approx(
        perturbative_amplitude(3, 2.0, 0.01), rel=1e-10)


def test_pfa():
    assert pfa_energy(1.0, 1.1) == pytest.approx(-math.pi ** 3 / 0.36)
    with pytest.raises(ValueError):
        pfa_energy(2.0, 1.0)


def test_pfa_limit_approached():
    a, b = 1.0, 1.05
    exact = concentric_tm(a, b, rel_tol=1e-8) + concentric_te(a, b, rel_tol=1e-8)
    assert abs(exact / pfa_energy(a, b) - 1) < 0.05


def test_table1_rows():
    rows = table1(TABLE1_CASES[:2])
    assert [r[:3] for r in rows] == [(3, 2.0, 0.01), (3, 2.0, 0.05)]
    assert rows[1][3] == pytest.approx(25 * rows[0][3], rel=1e-12)
