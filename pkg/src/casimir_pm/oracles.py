"""Independent reference values.

* the concentric mode-sum energy, where the boundary determinant factorizes
  into ``prod_m [1 - f_m(ya) g_m(yb) / (f_m(yb) g_m(ya))]``,
* the second-order perturbative amplitude of the ``cos(nu phi0)`` part of
  the Dirichlet energy of two concentric corrugated cylinders,
* the proximity-force estimate for nearly touching concentric cylinders.

None of these go through the collocation matrices, so they can be used to
validate them.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence
from .quadrature import integrate_decaying
from .specfun import M_MAX_DEFAULT, log_bessel_ike, log_bessel_ike_prime

__all__ = [
    "concentric_log_q",
    "concentric_tm",
    "concentric_te",
    "concentric_mode_cutoff",
    "d_m",
    "b_nu",
    "BnuResult",
    "perturbative_amplitude",
    "pfa_energy",
    "TABLE1_CASES",
    "table1",
]

_MODE_TOL = 1e-14


def concentric_mode_cutoff(a, b):
    """Order beyond which the summed tail of the modes is below ``_MODE_TOL``
    relative to the ``m = 0`` term.

    The mode-``m`` term is bounded by ``~ (a/b)^(2m)``, so the tail past
    ``M`` is ``(a/b)^(2M) / (1 - (a/b)^2)``.
    """
    q2 = (a / b) ** 2
    m = math.log(_MODE_TOL * (1.0 - q2)) / math.log(q2)
    return int(math.ceil(m)) + 4


def concentric_log_q(y, a, b, te=False, m_max=None):
    """``ln Q(iy)`` for concentric circles, summed over ``|m| <= m_max``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if m_max is None:
        m_max = concentric_mode_cutoff(a, b)
    cap = max(m_max + 1, M_MAX_DEFAULT)
    if te:
        _, _, ia, ka = log_bessel_ike_prime(m_max, y * a, cap)
        _, _, ib, kb = log_bessel_ike_prime(m_max, y * b, cap)
    else:
        ia, ka = log_bessel_ike(m_max, y * a, cap)
        ib, kb = log_bessel_ike(m_max, y * b, cap)
    # exponential factors of the scaled functions: e^{ya - yb} / e^{yb - ya}
    log_ratio = ia + kb - ib - ka + (-2.0 * y * (b - a))[:, None]
    terms = np.log1p(-np.exp(log_ratio))
    weights = np.full(m_max + 1, 2.0)
    weights[0] = 1.0
    return terms @ weights


def _concentric(a, b, te, rel_tol, m_max, deterministic_sum):
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")

    def integrand(y):
        return y * concentric_log_q(y, a, b, te, m_max) / (4.0 * math.pi)

    res = integrate_decaying(integrand, b - a, rel_tol=rel_tol, y_min=1e-6 / a,
                             deterministic_sum=deterministic_sum)
    return res.value


def concentric_tm(a, b, rel_tol=1e-10, m_max=None, deterministic_sum=False):
    """Dirichlet (TM) energy per unit length of concentric cylinders.

    Parameters
    ----------
    a, b : float
        Inner and outer radii, ``0 < a < b``.
    rel_tol : float
        Quadrature tolerance.
    m_max : int, optional
        Mode cutoff ``|m| <= m_max``; by default every mode that matters.

    Examples
    --------
    >>> round(concentric_tm(1.0, 2.0) * 1e3, 5)
    -62.07399
    """
    return _concentric(a, b, False, rel_tol, m_max, deterministic_sum)


def concentric_te(a, b, rel_tol=1e-10, m_max=None, deterministic_sum=False):
    """Neumann (TE) counterpart of :func:`concentric_tm`."""
    return _concentric(a, b, True, rel_tol, m_max, deterministic_sum)


def d_m(y, x, m):
    """``D_m(y; x) = I_m(x(1+y)) K_m(x(1-y)) - I_m(x(1-y)) K_m(x(1+y))``."""
    if not 0 < y < 1:
        raise ValueError("need 0 < y < 1")
    ld, _ = _log_d_table(y, np.atleast_1d(np.asarray(x, dtype=float)), abs(int(m)))
    out = np.exp(ld[..., abs(int(m))])
    return float(out[0]) if np.ndim(x) == 0 else out


def _log_d_table(y, x, m_top):
    """``ln D_m`` for ``m = 0..m_top``; returns (log D, log of the leading term)."""
    u, v = x * (1.0 + y), x * (1.0 - y)
    iu, ku = log_bessel_ike(m_top, u)
    iv_, kv_ = log_bessel_ike(m_top, v)
    lead = iu + kv_ + (2.0 * x * y)[:, None]
    sub = iv_ + ku - (2.0 * x * y)[:, None]
    return lead + np.log(-np.expm1(sub - lead)), lead


@dataclass
class BnuResult:
    value: float
    m_tail: float
    x_error: float
    m_cut: int


def b_nu(nu, y, rel_tol=1e-10, max_m=M_MAX_DEFAULT - 16):
    """The mode sum ``B_nu(y)`` of the perturbative corrugation energy.

    ``B = (15/pi^4) sum_m 8 y^3 int_0^inf x 4 y^2 / ((1 - y^2) D_m D_{m+nu}) dx``

    The sum runs over ``m = -nu-M .. M``, symmetric about ``-nu/2`` where
    the terms pair up; ``M`` grows until the geometric extrapolation of the
    last terms is below ``rel_tol``.

    Returns
    -------
    BnuResult
        Value with the estimated m-tail and x-quadrature error.
    """
    nu = int(nu)
    if nu < 1:
        raise ValueError("nu must be a positive integer")
    if not 0 < y < 1:
        raise ValueError("need 0 < y < 1")
    prefactor = 15.0 / math.pi ** 4 * 8.0 * y ** 3 * 4.0 * y * y / (1.0 - y * y)
    q = (1.0 - y) / (1.0 + y)
    m_cut = max(8, int(math.ceil(math.log(rel_tol) / (2.0 * math.log(q)))) + 4)

    while True:
        if m_cut > max_m:
            raise NonConvergence(f"mode sum for B_nu did not converge below m = {max_m}")
        orders = np.arange(0, m_cut + 1)
        top = m_cut + nu

        def integrand(x, orders=orders, top=top):
            ld, _ = _log_d_table(y, x, top)
            # m and -m-nu give equal terms; sum m >= 0 twice, plus the middle
            # orders -nu < m < 0 once
            pair = np.exp(-(ld[:, orders] + ld[:, orders + nu]))
            vals = 2.0 * pair.sum(axis=1)
            mid = np.arange(1, nu)
            if mid.size:
                vals += np.exp(-(ld[:, mid] + ld[:, nu - mid])).sum(axis=1)
            return x * vals

        def last_terms(x, top=top):
            ld, _ = _log_d_table(y, x, top)
            ks = np.arange(m_cut - 2, m_cut + 1)
            return x[:, None] * np.exp(-(ld[:, ks] + ld[:, ks + nu]))

        res = integrate_decaying(integrand, 2.0 * y, rel_tol=rel_tol, y_min=1e-8)
        # per-order integrals of the last three terms for the tail estimate
        t = [integrate_decaying(lambda x, k=k: last_terms(x)[:, k], 2.0 * y,
                                rel_tol=1e-6, y_min=1e-8).value for k in range(3)]
        ratio = t[2] / t[1] if t[1] > 0 else 0.0
        tail = 2.0 * t[2] * ratio / (1.0 - ratio) if 0 <= ratio < 1 else math.inf
        if tail <= rel_tol * abs(res.value):
            return BnuResult(value=prefactor * res.value, m_tail=prefactor * tail,
                             x_error=prefactor * res.error, m_cut=m_cut)
        m_cut *= 2


def perturbative_amplitude(nu, alpha, h, a=1.0, rel_tol=1e-10):
    """Amplitude of the ``cos(nu phi0)`` term of the TM energy per unit length
    of concentric corrugated cylinders, to second order in ``h``.

    ``A = pi r+ (pi^2 / (240 r-^5)) h^2 B_nu(r-/r+)`` with ``r- = b - a`` and
    ``r+ = a + b``.  With ``a = 1`` (the default) ``A`` is in units of
    ``1/a^2`` and ``h`` is ``h/a``.

    Examples
    --------
    >>> f"{perturbative_amplitude(3, 2.0, 0.01):.5g}"
    '3.0414e-05'
    """
    if h / a > 0.1:
        warnings.warn(f"h/a = {h / a:g} is outside the small-amplitude regime of the "
                      "perturbative amplitude", RuntimeWarning, stacklevel=2)
    b = alpha * a
    r_minus, r_plus = b - a, b + a
    bn = b_nu(nu, r_minus / r_plus, rel_tol=rel_tol)
    return math.pi * r_plus * math.pi ** 2 / (240.0 * r_minus ** 5) * h * h * bn.value


def pfa_energy(a, b):
    """Proximity-force estimate ``-pi^3 a / (360 (b - a)^3)`` of the TM+TE
    energy per unit length for nearly touching concentric cylinders."""
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    return -math.pi ** 3 * a / (360.0 * (b - a) ** 3)


# (nu, alpha, h/a) of the reference corrugation amplitudes
TABLE1_CASES = tuple((nu, alpha, h) for nu, alpha in ((3, 2.0), (3, 3.5), (5, 2.0))
                     for h in (0.01, 0.05, 0.1, 0.3))


def table1(cases=TABLE1_CASES):
    """Perturbative amplitudes for every ``(nu, alpha, h)`` case."""
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for nu, alpha, h in cases:
            rows.append((nu, alpha, h, perturbative_amplitude(nu, alpha, h)))
    return rows
