r"""Modified Bessel functions of integer order in log-scaled form.

The collocation matrices contain products such as :math:`I_m(y a) K_m(y b)`
whose factors over- or underflow long before the product does.  All values
are therefore produced as logarithms (table routines) or as
:class:`ScaledValue` (``mantissa * exp(exponent)``) for the public scalar API.

Algorithm
---------
* :math:`K_0, K_1`: power series for :math:`x \le 2`, Steed's continued
  fraction (CF2) for :math:`x > 2`.
* :math:`K_{m+1}/K_m`: forward recurrence of the ratio (stable for K).
* :math:`I_{m+1}/I_m`: continued fraction (CF1) at the top order followed by
  backward recurrence of the ratio (stable for I).
* :math:`I_m` from the Wronskian
  :math:`I_m K_{m+1} + I_{m+1} K_m = 1/x`.

Derivatives use :math:`I'_m = (I_{m-1}+I_{m+1})/2` and
:math:`K'_m = -(K_{m-1}+K_{m+1})/2` evaluated at a common exponent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ScaledValue",
    "M_MAX_DEFAULT",
    "log_bessel_ike",
    "log_bessel_ik",
    "log_bessel_ike_prime",
    "bessel_i",
    "bessel_k",
    "bessel_i_prime",
    "bessel_k_prime",
]

M_MAX_DEFAULT = 256

_EULER_GAMMA = 0.57721566490153286061
_EPS = np.finfo(float).eps
_SERIES_TERMS = 30
_CF_MAXIT = 200_000


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as ``mantissa * exp(exponent)``.

    After normalization the mantissa magnitude lies in ``[1, e)`` (or is 0),
    so ``exponent`` is the integer part of ``ln|value|``.
    """

    mantissa: float
    exponent: float

    @classmethod
    def from_log(cls, log_abs, sign=1.0):
        if not np.isfinite(log_abs):
            if log_abs < 0:
                return cls(0.0, 0.0)
            raise OverflowError("infinite logarithm")
        e = math.floor(log_abs)
        return cls(float(sign) * math.exp(log_abs - e), float(e))

    @classmethod
    def from_scaled_log(cls, log_mant, exponent, sign=1.0):
        """Build from ``exp(log_mant) * exp(exponent)`` keeping ``exponent``
        exact where possible."""
        whole = math.floor(log_mant)
        e = exponent + whole
        frac = log_mant - whole
        # fold the fractional part of exponent into the mantissa
        e_int = math.floor(e)
        frac += e - e_int
        if frac >= 1.0:
            frac -= 1.0
            e_int += 1
        return cls(float(sign) * math.exp(frac), float(e_int))

    @property
    def log_abs(self) -> float:
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.exponent

    @property
    def sign(self) -> float:
        return math.copysign(1.0, self.mantissa) if self.mantissa else 0.0

    @property
    def value(self) -> float:
        """Plain float (may overflow to inf or underflow to 0)."""
        if self.mantissa == 0.0:
            return 0.0
        with np.errstate(over="ignore"):
            return float(self.mantissa * np.exp(self.exponent))

    def __float__(self):
        return self.value

    def __mul__(self, other):
        if isinstance(other, ScaledValue):
            if self.mantissa == 0.0 or other.mantissa == 0.0:
                return ScaledValue(0.0, 0.0)
            return ScaledValue.from_log(self.log_abs + other.log_abs, self.sign * other.sign)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, ScaledValue):
            if other.mantissa == 0.0:
                raise ZeroDivisionError("division by zero ScaledValue")
            if self.mantissa == 0.0:
                return ScaledValue(0.0, 0.0)
            return ScaledValue.from_log(self.log_abs - other.log_abs, self.sign * other.sign)
        return NotImplemented

    def __neg__(self):
        return ScaledValue(-self.mantissa, self.exponent)


def _k01_series(x):
    """Unscaled K0, K1 by their ascending series; valid for 0 < x <= 2."""
    q = 0.25 * x * x
    lx = np.log(0.5 * x)
    i0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    t0 = np.ones_like(x)  # q^k / (k!)^2
    t1 = np.ones_like(x)  # q^k / (k! (k+1)!)
    harm = 0.0  # H_k
    for k in range(_SERIES_TERMS):
        if k > 0:
            t0 = t0 * q / (k * k)
            t1 = t1 * q / (k * (k + 1))
            harm += 1.0 / k
        i0 = i0 + t0
        i1 = i1 + t1
        s0 = s0 + t0 * harm
        # psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        s1 = s1 + t1 * (-2.0 * _EULER_GAMMA + 2.0 * harm + 1.0 / (k + 1))
    i1 = i1 * 0.5 * x
    k0 = -(lx + _EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + lx * i1 - 0.25 * x * s1
    return k0, k1


def _k01_steed(x):
    """Exponentially scaled K0, K1 by Steed's continued fraction; x > 2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, _CF_MAXIT):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels / s) < _EPS):
            break
    else:  # pragma: no cover
        raise DomainError("CF2 failed to converge")
    h = a1 * h
    k0e = np.sqrt(np.pi / (2.0 * x)) / s
    k1e = k0e * (x + 0.5 - h) / x
    return k0e, k1e


def _log_k01e(x):
    """ln of exponentially scaled K0, K1 (``K_m(x) e^x``)."""
    lk0 = np.empty_like(x)
    lk1 = np.empty_like(x)
    small = x <= 2.0
    if np.any(small):
        xs = x[small]
        k0, k1 = _k01_series(xs)
        lk0[small] = np.log(k0) + xs
        lk1[small] = np.log(k1) + xs
    if np.any(~small):
        k0e, k1e = _k01_steed(x[~small])
        lk0[~small] = np.log(k0e)
        lk1[~small] = np.log(k1e)
    return lk0, lk1


def _i_ratio_cf1(order, x):
    """I_{order+1}(x) / I_order(x) by modified Lentz on the continued fraction
    1/(2(n+1)/x + 1/(2(n+2)/x + ...))."""
    tiny = 1e-300
    f = np.full_like(x, tiny)
    c = f.copy()
    d = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _CF_MAXIT):
        b = 2.0 * (order + k) / x
        d_new = b + d
        d_new = np.where(np.abs(d_new) < tiny, tiny, d_new)
        d_new = 1.0 / d_new
        c_new = b + 1.0 / c
        c_new = np.where(np.abs(c_new) < tiny, tiny, c_new)
        delta = c_new * d_new
        f = np.where(active, f * delta, f)
        d = d_new
        c = c_new
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            break
    else:  # pragma: no cover
        raise DomainError("CF1 failed to converge")
    return f


def _check_args(m_top, x, m_max):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError("modified Bessel functions require finite x > 0")
    if m_top < 0:
        raise DomainError("order must be a non-negative integer")
    if m_top > m_max:
        raise DomainError(f"order {m_top} exceeds m_max={m_max}")
    return x


def log_bessel_ike(m_top, x, m_max=None):
    r"""Logarithms of the exponentially scaled functions
    :math:`I_m(x) e^{-x}` and :math:`K_m(x) e^{x}` for ``m = 0..m_top``.

    Keeping the factor :math:`e^{\pm x}` out of the logarithm preserves full
    relative precision at large ``x``.

    Parameters
    ----------
    m_top : int
        Highest order returned.
    x : array_like
        Positive arguments, any shape.
    m_max : int, optional
        Guard on ``m_top``; defaults to :data:`M_MAX_DEFAULT`.

    Returns
    -------
    log_ie, log_ke : ndarray
        Arrays of shape ``x.shape + (m_top + 1,)``.
    """
    if m_max is None:
        m_max = M_MAX_DEFAULT
    x = _check_args(m_top, x, m_max)
    shape = x.shape
    x = x.ravel()
    n = m_top + 1

    lk0, lk1 = _log_k01e(x)
    # s[:, m] = K_{m+1}/K_m for m = 0..m_top
    s = np.empty((x.size, n))
    s[:, 0] = np.exp(lk1 - lk0)
    for m in range(1, n):
        s[:, m] = 1.0 / s[:, m - 1] + 2.0 * m / x
    log_ke = np.empty((x.size, n))
    log_ke[:, 0] = lk0
    if n > 1:
        log_ke[:, 1:] = lk0[:, None] + np.cumsum(np.log(s[:, :-1]), axis=1)

    # r[:, m] = I_{m+1}/I_m
    r = np.empty((x.size, n))
    r[:, m_top] = _i_ratio_cf1(m_top, x)
    for m in range(m_top, 0, -1):
        r[:, m - 1] = 1.0 / (2.0 * m / x + r[:, m])

    # Wronskian: I_m = 1 / (x K_m (s_m + r_m))
    log_ie = -np.log(x)[:, None] - log_ke - np.log(s + r)
    return log_ie.reshape(shape + (n,)), log_ke.reshape(shape + (n,))


def log_bessel_ik(m_top, x, m_max=None):
    """Logarithms of :math:`I_m(x)` and :math:`K_m(x)` for ``m = 0..m_top``.

    Same arguments as :func:`log_bessel_ike`.
    """
    log_ie, log_ke = log_bessel_ike(m_top, x, m_max=m_max)
    x = np.asarray(x, dtype=float)[..., None]
    return log_ie + x, log_ke - x


def log_bessel_ike_prime(m_top, x, m_max=None):
    """Scaled log-values of I_m, K_m and of their derivatives.

    Returns
    -------
    log_ie, log_ke, log_ipe, log_kpe : ndarray
        ``log_ipe = ln(I'_m e^{-x})`` and ``log_kpe = ln(|K'_m| e^{x})``
        (``K'_m < 0``), each of shape ``x.shape + (m_top + 1,)``.
    """
    if m_max is None:
        m_max = M_MAX_DEFAULT
    _check_args(m_top, x, m_max)
    log_i, log_k = log_bessel_ike(m_top + 1, x, m_max=m_max + 1)
    ln2 = math.log(2.0)
    # order m-1 with the reflection f_{-1} = f_1
    lo_i = np.concatenate([log_i[..., 1:2], log_i[..., :m_top]], axis=-1)
    lo_k = np.concatenate([log_k[..., 1:2], log_k[..., :m_top]], axis=-1)
    log_ip = np.logaddexp(lo_i, log_i[..., 1:]) - ln2
    log_kp = np.logaddexp(lo_k, log_k[..., 1:]) - ln2
    return log_i[..., :-1], log_k[..., :-1], log_ip, log_kp


def _scalar(m, x, m_max, which):
    m = abs(int(m))
    if m_max is None:
        m_max = M_MAX_DEFAULT
    x = float(x)
    log_ie, log_ke, log_ipe, log_kpe = log_bessel_ike_prime(m, np.array([x]), m_max=m_max)
    lv, e, sign = {
        "i": (log_ie, x, 1.0),
        "k": (log_ke, -x, 1.0),
        "ip": (log_ipe, x, 1.0),
        "kp": (log_kpe, -x, -1.0),
    }[which]
    return ScaledValue.from_scaled_log(lv[0, m], e, sign)


def bessel_i(m, x, m_max=None) -> ScaledValue:
    """:math:`I_m(x)` as a :class:`ScaledValue`; ``I_{-m} = I_m``."""
    return _scalar(m, x, m_max, "i")


def bessel_k(m, x, m_max=None) -> ScaledValue:
    """:math:`K_m(x)` as a :class:`ScaledValue`; ``K_{-m} = K_m``."""
    return _scalar(m, x, m_max, "k")


def bessel_i_prime(m, x, m_max=None) -> ScaledValue:
    """:math:`I'_m(x) = (I_{m-1}(x) + I_{m+1}(x))/2`."""
    return _scalar(m, x, m_max, "ip")


def bessel_k_prime(m, x, m_max=None) -> ScaledValue:
    """:math:`K'_m(x) = -(K_{m-1}(x) + K_{m+1}(x))/2` (negative)."""
    return _scalar(m, x, m_max, "kp")
