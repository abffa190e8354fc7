r"""Collocation matrices on the imaginary frequency axis and :math:`\ln Q(iy)`.

With ``2S + 1`` points on each curve and orders ``m = -S..S``::

    (M1)_pm = f_m(y r_p) e^{i m theta_p}     f = I  (regular part, inner curve)
    (M2)_pm = g_m(y r_p) e^{i m theta_p}     g = K  (singular part, inner curve)
    (N1)_qm, (N2)_qm  likewise on the outer curve

and ``Q(iy) = det[1 - M1 N1^{-1} N2 M2^{-1}]``.  For TE the Bessel factors
are replaced by derivatives, either radial (``TE_radial``) or along the true
outward normal (``TE_normal``).

Each matrix is stored as ``mantissa * exp(row_log[p] + col_log[m])``: the
row factor is the exact ``exp(+-y r_p)`` of the exponentially scaled Bessel
functions and the column factor is the value at a reference radius.  Since
``det(1 - AB) = det(1 - BA)``, the determinant is evaluated in mode space as
``det[1 - (N1^{-1} N2)(M2^{-1} M1)]``, where the row factors combine into a
single scalar ``exp(-2y (min r_outer - max r_inner))`` and a pair of
diagonal weights bounded by one.  Column factors cancel by similarity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import SingularCollocation
from .geometry import CurvePair, PointGrid
from .specfun import log_bessel_ike_prime

__all__ = [
    "Polarization",
    "ScaledMatrix",
    "SpectralMatrixSet",
    "assemble",
    "CollocationKernel",
    "log_q",
    "q_imag_residual",
    "logdet_lu",
]

_EPS = np.finfo(float).eps
_PIVOT_FACTOR = 1e3
# below this 1-norm of T, ln det(1 - T) is summed as -sum tr(T^k)/k
_SERIES_NORM = 0.05
# frequencies are processed in batches of at most this many matrix entries
_CHUNK_ENTRIES = 1 << 18


class Polarization(str, enum.Enum):
    TM = "TM"
    TE_RADIAL = "TE_radial"
    TE_NORMAL = "TE_normal"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"tm": cls.TM, "te": cls.TE_RADIAL, "te_radial": cls.TE_RADIAL,
                   "te_normal": cls.TE_NORMAL}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown polarization {value!r}") from None

    @property
    def is_te(self):
        return self is not Polarization.TM


@dataclass(frozen=True)
class ScaledMatrix:
    """``mantissa[p, m] * exp(row_log[p] + col_log[m])``."""

    mantissa: np.ndarray
    row_log: np.ndarray
    col_log: np.ndarray

    def dense(self):
        """Plain complex matrix; overflows for large arguments."""
        with np.errstate(over="ignore"):
            return self.mantissa * np.exp(self.row_log[:, None] + self.col_log[None, :])


@dataclass(frozen=True)
class SpectralMatrixSet:
    y: float
    S: int
    pol: Polarization
    m1: ScaledMatrix
    m2: ScaledMatrix
    n1: ScaledMatrix
    n2: ScaledMatrix

    @property
    def orders(self):
        return np.arange(-self.S, self.S + 1)


def _bessel_blocks(y, grid: PointGrid, S, pol, col_i, col_k):
    """Mantissas of the (f = I-type, g = K-type) matrices on one grid for a
    stack of frequencies ``y`` (shape (ny,)); returns arrays (ny, n, n)."""
    m = np.arange(-S, S + 1)
    am = np.abs(m)
    x = y[:, None] * grid.r[None, :]
    log_ie, log_ke, log_ipe, log_kpe = log_bessel_ike_prime(S, x)
    log_ie, log_ke = log_ie[..., am], log_ke[..., am]
    phase = np.exp(1j * np.outer(grid.theta, m))[None, :, :]
    ci = col_i[:, None, :]
    ck = col_k[:, None, :]
    if pol is Polarization.TM:
        f = np.exp(log_ie - ci)
        g = np.exp(log_ke - ck)
    else:
        log_ipe, log_kpe = log_ipe[..., am], log_kpe[..., am]
        log_y = np.log(y)[:, None, None]
        fp = np.exp(log_ipe + log_y - ci)
        gp = -np.exp(log_kpe + log_y - ck)
        if pol is Polarization.TE_RADIAL:
            f, g = fp, gp
        else:
            nr = grid.normal_r[None, :, None]
            tang = 1j * grid.normal_theta[None, :, None] * m[None, None, :] / grid.r[None, :, None]
            f = nr * fp + tang * np.exp(log_ie - ci)
            g = nr * gp + tang * np.exp(log_ke - ck)
    return f * phase, g * phase


def _column_logs(y, r_ref, S, pol):
    """Column scales: the (derivative) Bessel values at a reference radius,
    so that every column of every mantissa is O(1) in magnitude."""
    log_ie, log_ke, log_ipe, log_kpe = log_bessel_ike_prime(S, y * r_ref)
    am = np.abs(np.arange(-S, S + 1))
    if pol is Polarization.TM:
        return log_ie[..., am], log_ke[..., am]
    log_y = np.log(y)[:, None]
    return log_ipe[..., am] + log_y, log_kpe[..., am] + log_y


def _reference_radius(grid_inner, grid_outer):
    return math.sqrt(float(np.mean(grid_inner.r)) * float(np.mean(grid_outer.r)))


def assemble(y, grid_inner: PointGrid, grid_outer: PointGrid, S, pol=Polarization.TM):
    """Build the four collocation matrices at imaginary frequency ``iy``.

    The phase factors ``i^m``, ``(-i)^m`` and the ``2/pi`` of the Hankel
    function drop out of ``Q`` and are not included.
    """
    pol = Polarization.parse(pol)
    n = 2 * S + 1
    if len(grid_inner) != n or len(grid_outer) != n:
        raise ValueError(f"both grids need 2S+1 = {n} points")
    if not y > 0:
        raise ValueError("y must be positive")
    ys = np.array([float(y)])
    col_i, col_k = _column_logs(ys, _reference_radius(grid_inner, grid_outer), S, pol)
    f_in, g_in = _bessel_blocks(ys, grid_inner, S, pol, col_i, col_k)
    f_out, g_out = _bessel_blocks(ys, grid_outer, S, pol, col_i, col_k)
    yr_in = y * grid_inner.r
    yr_out = y * grid_outer.r
    return SpectralMatrixSet(
        y=float(y), S=S, pol=pol,
        m1=ScaledMatrix(f_in[0], yr_in, col_i[0]),
        m2=ScaledMatrix(g_in[0], -yr_in, col_k[0]),
        n1=ScaledMatrix(f_out[0], yr_out, col_i[0]),
        n2=ScaledMatrix(g_out[0], -yr_out, col_k[0]),
    )


def logdet_lu(a):
    """``ln det a`` for a complex square matrix via LU with partial pivoting.

    Returns the real part ``sum ln|u_ii|`` and the imaginary part wrapped to
    ``(-pi, pi]`` (pivot swaps contribute ``pi`` each).
    """
    lu, piv = lu_factor(a, check_finite=False)
    d = np.diag(lu)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    re = float(np.sum(np.log(np.abs(d))))
    im = float(np.sum(np.angle(d)) + math.pi * swaps)
    im = math.remainder(im, 2.0 * math.pi)
    return re, im


def _logdet_one_minus(t):
    norm = np.abs(t).sum(axis=0).max()
    if norm == 0.0:
        return 0.0, 0.0
    if norm < _SERIES_NORM:
        # -sum_k tr(T^k)/k keeps full relative precision when T is small
        terms = max(1, int(math.ceil(math.log(_EPS) / math.log(norm))))
        acc = 0.0 + 0.0j
        power = t
        for k in range(1, terms + 1):
            acc -= np.trace(power) / k
            if k < terms:
                power = power @ t
        return float(acc.real), float(acc.imag)
    return logdet_lu(np.eye(len(t)) - t)


def _checked_lu(a, name, y):
    lu, piv = lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = np.abs(a).max()
    if not np.all(np.isfinite(lu)) or pivots.min() < _PIVOT_FACTOR * _EPS * scale:
        raise SingularCollocation(
            f"{name} is numerically singular at y={y:g} "
            f"(min pivot {pivots.min():.3g}, max entry {scale:.3g})")
    return lu, piv


class CollocationKernel:
    """Evaluates ``ln Q(iy)`` for one geometry, mode cutoff and polarization.

    Parameters
    ----------
    pair : CurvePair
        Inner and outer cross sections.
    S : int
        Mode cutoff; ``2S + 1`` points per curve.
    pol : Polarization or str
        ``TM``, ``TE_radial`` or ``TE_normal``.
    """

    def __init__(self, pair: CurvePair, S: int, pol=Polarization.TM, grids=None):
        self.pair = pair
        self.S = int(S)
        self.pol = Polarization.parse(pol)
        if grids is None:
            grids = pair.grids(self.S)
        self.grid_inner, self.grid_outer = grids
        self.r_ref = _reference_radius(self.grid_inner, self.grid_outer)
        self.r_in_max = float(self.grid_inner.r.max())
        self.r_out_min = float(self.grid_outer.r.min())

    def evaluate(self, y):
        """Return ``(Re ln Q, |Im ln Q|)`` as arrays matching ``y``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(~(y > 0)):
            raise ValueError("y must be positive")
        n = 2 * self.S + 1
        step = max(1, _CHUNK_ENTRIES // (n * n))
        if y.size > step:
            parts = [self.evaluate(y[i:i + step]) for i in range(0, y.size, step)]
            return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
        col_i, col_k = _column_logs(y, self.r_ref, self.S, self.pol)
        f_in, g_in = _bessel_blocks(y, self.grid_inner, self.S, self.pol, col_i, col_k)
        f_out, g_out = _bessel_blocks(y, self.grid_outer, self.S, self.pol, col_i, col_k)
        re = np.empty(y.shape)
        im = np.empty(y.shape)
        for j, yj in enumerate(y):
            re[j], im[j] = self._log_q_single(
                yj, f_in[j], g_in[j], f_out[j], g_out[j])
        return re, np.abs(im)

    def _log_q_single(self, y, f_in, g_in, f_out, g_out):
        log_g = -2.0 * y * (self.r_out_min - self.r_in_max)
        if log_g < -745.0:
            return 0.0, 0.0
        w_in = np.exp(-2.0 * y * (self.r_in_max - self.grid_inner.r))
        w_out = np.exp(-2.0 * y * (self.grid_outer.r - self.r_out_min))
        # row equilibration: N1/N2 and M2/M1 share rows, so Q is unchanged
        d_out = 1.0 / np.abs(f_out).max(axis=1)
        d_in = 1.0 / np.abs(g_in).max(axis=1)
        lu_n1 = _checked_lu(d_out[:, None] * f_out, "N1", y)
        lu_m2 = _checked_lu(d_in[:, None] * g_in, "M2", y)
        y_hat = lu_solve(lu_n1, (d_out * w_out)[:, None] * g_out, check_finite=False)
        z_hat = lu_solve(lu_m2, (d_in * w_in)[:, None] * f_in, check_finite=False)
        t = math.exp(log_g) * (y_hat @ z_hat)
        return _logdet_one_minus(t)

    def matrices(self, y):
        return assemble(y, self.grid_inner, self.grid_outer, self.S, self.pol)

    def __call__(self, y):
        re, _ = self.evaluate(y)
        return re


def _kernel_for(pair, S, pol):
    if isinstance(pair, CollocationKernel):
        return pair
    return CollocationKernel(pair, S, pol)


def log_q(y, pair, S=None, pol=Polarization.TM):
    """``Re ln Q(iy)``; scalar in, scalar out."""
    kern = _kernel_for(pair, S, pol)
    re, _ = kern.evaluate(y)
    return float(re[0]) if np.ndim(y) == 0 else re


def q_imag_residual(y, pair, S=None, pol=Polarization.TM):
    """``|Im ln Q(iy)|``, which vanishes for an exact computation."""
    kern = _kernel_for(pair, S, pol)
    _, im = kern.evaluate(y)
    return float(im[0]) if np.ndim(y) == 0 else im
