import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from casimir_pm.errors import SingularCollocation
from casimir_pm.geometry import PointGrid, make_pair, sample_points, Circle
from casimir_pm.kernel import (CollocationKernel, Polarization, assemble, log_q, logdet_lu,
                               q_imag_residual)


def concentric_log_q(y, a, b, S, te=False):
    m = np.arange(-S, S + 1)
    if te:
        ratio = special.ivp(m, y * a) * special.kvp(m, y * b) / (
            special.ivp(m, y * b) * special.kvp(m, y * a))
    else:
        ratio = special.iv(m, y * a) * special.kv(m, y * b) / (
            special.iv(m, y * b) * special.kv(m, y * a))
    return float(np.sum(np.log1p(-ratio)))


def test_concentric_factorization():
    S = 2
    pair = make_pair("circle", b=2.0)
    mats = assemble(1.0, *pair.grids(S), S, "TM")
    theta = 2 * np.pi * np.arange(5) / 5
    m = np.arange(-S, S + 1)
    expected = np.exp(1j * np.outer(theta, m)) * special.iv(m, 1.0)[None, :]
    np.testing.assert_allclose(mats.m1.dense(), expected, rtol=1e-13)


def test_single_mode_scalar():
    pair = make_pair("circle", b=2.0)
    expected = np.log(1 - special.iv(0, 1) * special.kv(0, 2) / (special.iv(0, 2) * special.kv(0, 1)))
    # S=0 is below the public minimum, so build the 1x1 system by hand
    grids = tuple(PointGrid(np.array([r]), np.array([0.0]), np.array([1.0]), np.array([0.0]))
                  for r in (1.0, 2.0))
    kern = CollocationKernel(pair, 0, "TM", grids=grids)
    assert kern(1.0)[0] == pytest.approx(expected, rel=1e-14)


def test_eccentric_entries_match_direct_evaluation():
    S, y = 10, 0.7
    pair = make_pair("eccentric", b=2.0, eps_x=0.3, eps_y=-0.2)
    gi, go = pair.grids(S)
    mats = assemble(y, gi, go, S, "TM")
    m = np.arange(-S, S + 1)
    for grid, mat, fn in [(gi, mats.m1, special.iv), (gi, mats.m2, special.kv),
                          (go, mats.n1, special.iv), (go, mats.n2, special.kv)]:
        direct = fn(m[None, :], y * grid.r[:, None]) * np.exp(1j * np.outer(grid.theta, m))
        np.testing.assert_allclose(mat.dense(), direct, rtol=1e-12)


def test_te_entries_match_direct_evaluation():
    S, y = 6, 1.3
    pair = make_pair("ellipse", b1=3.0, b2=3.4, eps_x=0.2)
    gi, go = pair.grids(S)
    mats = assemble(y, gi, go, S, "TE_radial")
    m = np.arange(-S, S + 1)
    direct = y * special.kvp(m[None, :], y * go.r[:, None]) * np.exp(1j * np.outer(go.theta, m))
    np.testing.assert_allclose(mats.n2.dense(), direct, rtol=1e-12)


@pytest.mark.parametrize("y", [1e-4, 0.05, 1.0, 7.5, 60.0])
@pytest.mark.parametrize("pol", ["TM", "TE_radial"])
def test_concentric_matches_diagonal_formula(y, pol):
    S = 10
    got = log_q(y, make_pair("circle", b=2.0), S, pol)
    expected = concentric_log_q(y, 1.0, 2.0, S, te=(pol != "TM"))
    assert got == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_decoupling_limit():
    pair = make_pair("eccentric", b=2.0, eps_x=0.3)
    val = log_q(200.0, pair, 10, "TM")
    assert val <= 0.0 and abs(val) < 1e-80


def test_te_normal_equals_radial_for_circles():
    pair = make_pair("circle", b=2.5)
    for y in (0.1, 1.0, 4.0):
        assert log_q(y, pair, 8, "TE_normal") == pytest.approx(log_q(y, pair, 8, "TE_radial"),
                                                               rel=1e-12)


def test_te_normal_differs_on_corrugated():
    pair = make_pair("corrugated", b=2.0, h=0.1, nu=3, phi0=0.3)
    assert log_q(1.0, pair, 12, "TE_normal") != pytest.approx(log_q(1.0, pair, 12, "TE_radial"),
                                                              rel=1e-6)


@pytest.mark.parametrize("kind, params, S, bound", [
    ("circle", dict(b=2.0), 10, 1e-10),
    ("eccentric", dict(b=2.0, eps_x=0.3), 10, 1e-8),
    ("corrugated", dict(b=2.0, h=0.1, nu=3, phi0=np.pi / 7), 18, 1e-8),
])
def test_imaginary_residual(kind, params, S, bound):
    assert q_imag_residual(1.0, make_pair(kind, **params), S, "TM") < bound


def test_sign_and_reality_on_grid():
    y = np.logspace(-5, 1.5, 80)
    for pair in (make_pair("eccentric", b=2.0, eps_x=0.4), make_pair("ellipse", b1=4, b2=4.33),
                 make_pair("corrugated", b=2.0, h=0.1, nu=3, phi0=0.4)):
        for pol in Polarization:
            re, im = CollocationKernel(pair, 12, pol).evaluate(y)
            assert np.all(re <= 0.0)
            assert np.all(im < 1e-8 * np.maximum(1.0, np.abs(re)))


@settings(max_examples=15, deadline=None)
@given(angle=st.floats(0, 2 * np.pi), y=st.floats(0.05, 5.0))
def test_global_rotation_invariance(angle, y):
    S = 10
    pair = make_pair("eccentric", b=2.0, eps_x=0.3, eps_y=0.1)
    gi, go = pair.grids(S)
    base = CollocationKernel(pair, S, "TM", grids=(gi, go))(y)[0]
    rotated = CollocationKernel(pair, S, "TM", grids=(gi.rotated(angle), go.rotated(angle)))(y)[0]
    assert rotated == pytest.approx(base, abs=1e-10)


def test_decay_beyond_knee():
    pair = make_pair("eccentric", b=2.0, eps_x=0.3)
    y = np.linspace(2.0, 30.0, 40)
    vals = np.abs(CollocationKernel(pair, 10, "TM")(y))
    assert np.all(np.diff(vals) < 0)


def test_singular_grid_detected():
    S = 3
    inner = sample_points(Circle(1.0), S)
    outer = sample_points(Circle(2.0), S)
    theta = outer.theta.copy()
    theta[1] = theta[0]
    bad = PointGrid(outer.r, theta, outer.normal_r, outer.normal_theta)
    kern = CollocationKernel(make_pair("circle", b=2.0), S, "TM", grids=(inner, bad))
    with pytest.raises(SingularCollocation):
        kern(1.0)


def test_wrong_grid_size():
    pair = make_pair("circle", b=2.0)
    gi, go = pair.grids(4)
    with pytest.raises(ValueError):
        assemble(1.0, gi, go, 5)
    with pytest.raises(ValueError):
        assemble(-1.0, gi, go, 4)


def test_logdet_lu_against_numpy():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    sign, logabs = np.linalg.slogdet(a)
    re, im = logdet_lu(a)
    assert re == pytest.approx(logabs, rel=1e-13)
    assert np.exp(1j * im) == pytest.approx(sign, abs=1e-12)


def test_polarization_parse():
    assert Polarization.parse("te") is Polarization.TE_RADIAL
    assert Polarization.parse("TM") is Polarization.TM
    with pytest.raises(ValueError):
        Polarization.parse("xx")
