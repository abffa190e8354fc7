"""Cross-section curves of the two conductors and their collocation grids.

Every curve is described in polar form ``r(theta)`` about the expansion
origin, which is always the centre of the inner cylinder.  Collocation
points on both curves share the uniform angular grid
``theta_p = 2 pi p / (2S + 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import StarShapeViolation

__all__ = [
    "BoundaryCurve",
    "Circle",
    "EccentricCircle",
    "CorrugatedCircle",
    "Ellipse",
    "Parabola",
    "PointGrid",
    "CurvePair",
    "radial_profile",
    "sample_points",
    "outward_normal",
    "make_pair",
    "KINDS",
]

KINDS = ("circle", "eccentric", "corrugated", "ellipse", "parabola")

_NEST_SAMPLES = 4096


class BoundaryCurve:
    """Base class: a closed curve, star-shaped about the origin."""

    kind = "abstract"

    def radius(self, theta):
        raise NotImplementedError

    def radius_derivative(self, theta):
        raise NotImplementedError

    def residual(self, x, y):
        """Implicit-equation residual of the Cartesian point ``(x, y)``
        (zero on the curve, scaled to be dimensionless)."""
        raise NotImplementedError

    def rotated(self, angle):
        """The same curve rotated about the origin (only needed for tests of
        rotation invariance; not every kind supports it)."""
        raise NotImplementedError(f"{self.kind} does not support rotation")


def _as_theta(theta):
    return np.asarray(theta, dtype=float)


@dataclass(frozen=True)
class Circle(BoundaryCurve):
    """Circle of radius ``r0`` centred on the origin."""

    r0: float
    kind = "circle"

    def __post_init__(self):
        if not self.r0 > 0:
            raise StarShapeViolation("circle radius must be positive")

    def radius(self, theta):
        return np.full_like(_as_theta(theta), self.r0)

    def radius_derivative(self, theta):
        return np.zeros_like(_as_theta(theta))

    def residual(self, x, y):
        return np.hypot(x, y) / self.r0 - 1.0

    def rotated(self, angle):
        return self


@dataclass(frozen=True)
class EccentricCircle(BoundaryCurve):
    """Circle of radius ``r0`` centred at ``(eps_x, eps_y)``."""

    r0: float
    eps_x: float = 0.0
    eps_y: float = 0.0
    kind = "eccentric"

    def __post_init__(self):
        if not self.r0 > 0:
            raise StarShapeViolation("circle radius must be positive")
        if math.hypot(self.eps_x, self.eps_y) >= self.r0:
            raise StarShapeViolation("origin must lie strictly inside the eccentric circle")

    def radius(self, theta):
        theta = _as_theta(theta)
        c, s = np.cos(theta), np.sin(theta)
        along = self.eps_x * c + self.eps_y * s
        cross = self.eps_x * s - self.eps_y * c
        return along + np.sqrt(self.r0**2 - cross**2)

    def radius_derivative(self, theta):
        theta = _as_theta(theta)
        c, s = np.cos(theta), np.sin(theta)
        along = self.eps_x * c + self.eps_y * s
        cross = self.eps_x * s - self.eps_y * c
        root = np.sqrt(self.r0**2 - cross**2)
        # d(along)/dtheta = -cross, d(cross)/dtheta = along
        return -cross - cross * along / root

    def residual(self, x, y):
        return np.hypot(x - self.eps_x, y - self.eps_y) / self.r0 - 1.0

    def rotated(self, angle):
        c, s = math.cos(angle), math.sin(angle)
        return replace(self, eps_x=c * self.eps_x - s * self.eps_y,
                       eps_y=s * self.eps_x + c * self.eps_y)


@dataclass(frozen=True)
class CorrugatedCircle(BoundaryCurve):
    """``r(theta) = r0 + amplitude * sin(nu * theta + phase)``."""

    r0: float
    amplitude: float
    nu: int
    phase: float = 0.0
    kind = "corrugated"

    def __post_init__(self):
        if int(self.nu) != self.nu or self.nu < 1:
            raise StarShapeViolation("corrugation frequency must be a positive integer")
        if self.amplitude < 0:
            raise StarShapeViolation("corrugation amplitude must be non-negative")
        if not self.r0 - self.amplitude > 0:
            raise StarShapeViolation("corrugation amplitude must be smaller than the mean radius")

    def radius(self, theta):
        theta = _as_theta(theta)
        return self.r0 + self.amplitude * np.sin(self.nu * theta + self.phase)

    def radius_derivative(self, theta):
        theta = _as_theta(theta)
        return self.amplitude * self.nu * np.cos(self.nu * theta + self.phase)

    def residual(self, x, y):
        rho = np.hypot(x, y)
        return (rho - self.radius(np.arctan2(y, x))) / self.r0

    def rotated(self, angle):
        return replace(self, phase=self.phase - self.nu * angle)


class _ImplicitCurve(BoundaryCurve):
    """Curves given by ``F(x, y) = 0``; the radius derivative follows from
    implicit differentiation."""

    def _grad(self, x, y):
        raise NotImplementedError

    def radius_derivative(self, theta):
        theta = _as_theta(theta)
        r = self.radius(theta)
        c, s = np.cos(theta), np.sin(theta)
        fx, fy = self._grad(r * c, r * s)
        return r * (fx * s - fy * c) / (fx * c + fy * s)


@dataclass(frozen=True)
class Ellipse(_ImplicitCurve):
    """Ellipse with semiaxes ``b1`` (along y) and ``b2`` (along x).

    The inner cylinder sits at ``(eps_x, eps_y)`` relative to the ellipse
    centre, so the centre is at ``(-eps_x, -eps_y)`` in origin coordinates.
    """

    b1: float
    b2: float
    eps_x: float = 0.0
    eps_y: float = 0.0
    kind = "ellipse"

    def __post_init__(self):
        if not (self.b1 > 0 and self.b2 > 0):
            raise StarShapeViolation("ellipse semiaxes must be positive")
        if (self.eps_x / self.b2) ** 2 + (self.eps_y / self.b1) ** 2 >= 1.0:
            raise StarShapeViolation("origin must lie strictly inside the ellipse")

    @property
    def focal_distance(self):
        return math.sqrt(abs(self.b2**2 - self.b1**2))

    def radius(self, theta):
        theta = _as_theta(theta)
        c, s = np.cos(theta), np.sin(theta)
        ib1, ib2 = 1.0 / self.b1**2, 1.0 / self.b2**2
        qa = c * c * ib2 + s * s * ib1
        qb = 2.0 * (self.eps_x * c * ib2 + self.eps_y * s * ib1)
        qc = self.eps_x**2 * ib2 + self.eps_y**2 * ib1 - 1.0
        # positive root, written to avoid cancellation (qc < 0)
        return -2.0 * qc / (qb + np.sqrt(qb * qb - 4.0 * qa * qc))

    def _grad(self, x, y):
        return 2.0 * (x + self.eps_x) / self.b2**2, 2.0 * (y + self.eps_y) / self.b1**2

    def residual(self, x, y):
        return ((x + self.eps_x) / self.b2) ** 2 + ((y + self.eps_y) / self.b1) ** 2 - 1.0


@dataclass(frozen=True)
class Parabola(_ImplicitCurve):
    """Parabolic mirror closed by a straight chord.

    In coordinates centred on the focus the arc is ``r = 2f / (1 + cos phi)``
    (vertex at ``(f, 0)``, opening towards ``-x``); it is cut by the chord
    through the arc points at ``phi = +-theta_cut``.  The inner cylinder sits
    at ``(eps_x, eps_y)`` relative to the focus.
    """

    f: float
    eps_x: float = 0.0
    eps_y: float = 0.0
    theta_cut: float = 2.0
    kind = "parabola"

    def __post_init__(self):
        if not self.f > 0:
            raise StarShapeViolation("focal distance must be positive")
        if not 0.0 < self.theta_cut < math.pi:
            raise StarShapeViolation("theta_cut must lie in (0, pi)")
        x, y = self.eps_x, self.eps_y
        if not (y * y < 4.0 * self.f * (self.f - x) and x > self.chord_x):
            raise StarShapeViolation("origin must lie strictly inside the truncated parabola")

    @property
    def chord_x(self):
        """x-coordinate of the closing chord (focus coordinates)."""
        rc = 2.0 * self.f / (1.0 + math.cos(self.theta_cut))
        return rc * math.cos(self.theta_cut)

    @property
    def chord_half_height(self):
        rc = 2.0 * self.f / (1.0 + math.cos(self.theta_cut))
        return rc * math.sin(self.theta_cut)

    def _arc_distance(self, c, s):
        # (eps_y + t s)^2 = 4 f (f - eps_x - t c)
        qa = s * s
        qb = 2.0 * self.eps_y * s + 4.0 * self.f * c
        qc = self.eps_y**2 - 4.0 * self.f * (self.f - self.eps_x)
        disc = np.sqrt(qb * qb - 4.0 * qa * qc)
        with np.errstate(divide="ignore"):
            t = -2.0 * qc / (qb + disc)
        return np.where(qb + disc > 0, t, np.inf)

    def _chord_distance(self, c):
        with np.errstate(divide="ignore"):
            t = (self.chord_x - self.eps_x) / c
        return np.where(c < 0, t, np.inf)

    def on_chord(self, theta):
        theta = _as_theta(theta)
        c, s = np.cos(theta), np.sin(theta)
        return self._chord_distance(c) < self._arc_distance(c, s)

    def radius(self, theta):
        theta = _as_theta(theta)
        c, s = np.cos(theta), np.sin(theta)
        return np.minimum(self._arc_distance(c, s), self._chord_distance(c))

    def _grad(self, x, y):
        xf, yf = x + self.eps_x, y + self.eps_y
        chord = np.isclose(xf, self.chord_x, rtol=0.0, atol=1e-12 * self.f)
        gx = np.where(chord, 1.0, 4.0 * self.f)
        gy = np.where(chord, 0.0, 2.0 * yf)
        return gx, gy

    def residual(self, x, y):
        xf, yf = np.asarray(x) + self.eps_x, np.asarray(y) + self.eps_y
        arc = (yf * yf - 4.0 * self.f * (self.f - xf)) / (4.0 * self.f**2)
        chord = (xf - self.chord_x) / self.f
        return np.where(np.abs(chord) < np.abs(arc), chord, arc)


@dataclass(frozen=True)
class PointGrid:
    """Collocation points ``(r_p, theta_p)`` on one curve."""

    r: np.ndarray
    theta: np.ndarray
    # outward normal in the local polar basis (n_r, n_theta)
    normal_r: np.ndarray = field(default=None, repr=False)
    normal_theta: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.r)

    @property
    def x(self):
        return self.r * np.cos(self.theta)

    @property
    def y(self):
        return self.r * np.sin(self.theta)

    def rotated(self, angle):
        return replace(self, theta=self.theta + angle)


def radial_profile(curve: BoundaryCurve, theta):
    """Radius of ``curve`` in direction ``theta`` about the origin."""
    r = curve.radius(theta)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise StarShapeViolation(f"{curve.kind} curve has no positive radius at some angle")
    return r


def _polar_normal(curve, theta):
    r = radial_profile(curve, theta)
    dr = curve.radius_derivative(theta)
    norm = np.hypot(r, dr)
    return r / norm, -dr / norm


def outward_normal(curve: BoundaryCurve, theta):
    """Unit outward normal (Cartesian components) at polar angle ``theta``."""
    theta = _as_theta(theta)
    nr, nt = _polar_normal(curve, theta)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([nr * c - nt * s, nr * s + nt * c], axis=-1)


def sample_points(curve: BoundaryCurve, S: int, offset: float = 0.0) -> PointGrid:
    """``2S + 1`` points at ``theta_p = offset + 2 pi p / (2S + 1)``."""
    if int(S) != S or S < 1:
        raise ValueError("S must be a positive integer")
    theta = offset + 2.0 * np.pi * np.arange(2 * S + 1) / (2 * S + 1)
    r = radial_profile(curve, theta)
    nr, nt = _polar_normal(curve, theta)
    return PointGrid(r=r, theta=theta, normal_r=nr, normal_theta=nt)


@dataclass(frozen=True)
class CurvePair:
    """Inner and outer conductor cross sections sharing one expansion origin."""

    inner: BoundaryCurve
    outer: BoundaryCurve

    def __post_init__(self):
        gap = self.gap
        if not gap > 0:
            raise StarShapeViolation(
                f"outer curve must strictly enclose the inner curve (min radial gap {gap:g})")

    @property
    def gap(self):
        """Minimum over angle of ``r_outer - r_inner``."""
        theta = 2.0 * np.pi * np.arange(_NEST_SAMPLES) / _NEST_SAMPLES
        return float(np.min(radial_profile(self.outer, theta) - radial_profile(self.inner, theta)))

    @property
    def scale(self):
        """Mean inner radius, the unit of length for reported energies."""
        theta = 2.0 * np.pi * np.arange(256) / 256
        return float(np.mean(radial_profile(self.inner, theta)))

    def grids(self, S):
        return sample_points(self.inner, S), sample_points(self.outer, S)

    def scaled(self, factor):
        """Every length multiplied by ``factor``."""
        return CurvePair(_scale_curve(self.inner, factor), _scale_curve(self.outer, factor))

    def rotated(self, angle):
        return CurvePair(self.inner.rotated(angle), self.outer.rotated(angle))


_LENGTH_FIELDS = {
    "circle": ("r0",),
    "eccentric": ("r0", "eps_x", "eps_y"),
    "corrugated": ("r0", "amplitude"),
    "ellipse": ("b1", "b2", "eps_x", "eps_y"),
    "parabola": ("f", "eps_x", "eps_y"),
}


def _scale_curve(curve, factor):
    return replace(curve, **{k: getattr(curve, k) * factor for k in _LENGTH_FIELDS[curve.kind]})


# Parameters accepted by make_pair for each outer kind (lengths in units of a).
PAIR_PARAMS = {
    "circle": {"b": None},
    "eccentric": {"b": None, "eps_x": 0.0, "eps_y": 0.0},
    "corrugated": {"b": None, "h": None, "nu": None, "phi0": 0.0},
    "ellipse": {"b1": None, "b2": None, "eps_x": 0.0, "eps_y": 0.0},
    "parabola": {"f": None, "eps_x": 0.0, "eps_y": 0.0, "theta_cut": 2.0},
}


def make_pair(kind: str, a: float = 1.0, **params) -> CurvePair:
    """Build a two-conductor configuration with a circular inner cylinder of
    radius ``a`` (corrugated with zero phase for ``kind='corrugated'``).

    For ``kind='corrugated'`` the outer corrugation is the inner one rotated
    by the angle ``phi0``: ``r_b = b + h sin(nu (theta + phi0))``, so the
    configuration is periodic in ``phi0`` with period ``2 pi / nu``.

    Examples
    --------
    >>> pair = make_pair("eccentric", b=2.0, eps_x=0.3)
    >>> round(pair.gap, 12)
    0.7
    """
    if kind not in PAIR_PARAMS:
        raise ValueError(f"unknown outer kind {kind!r}; expected one of {KINDS}")
    spec = PAIR_PARAMS[kind]
    unknown = set(params) - set(spec)
    if unknown:
        raise ValueError(f"unexpected parameters for {kind}: {sorted(unknown)}")
    p = {k: params.get(k, default) for k, default in spec.items()}
    missing = [k for k, v in p.items() if v is None]
    if missing:
        raise ValueError(f"missing parameters for {kind}: {missing}")

    if kind == "circle":
        return CurvePair(Circle(a), Circle(p["b"] * a))
    if kind == "eccentric":
        return CurvePair(Circle(a), EccentricCircle(p["b"] * a, p["eps_x"] * a, p["eps_y"] * a))
    if kind == "corrugated":
        nu = int(p["nu"])
        h = p["h"] * a
        return CurvePair(CorrugatedCircle(a, h, nu, 0.0),
                         CorrugatedCircle(p["b"] * a, h, nu, nu * p["phi0"]))
    if kind == "ellipse":
        return CurvePair(Circle(a), Ellipse(p["b1"] * a, p["b2"] * a, p["eps_x"] * a, p["eps_y"] * a))
    return CurvePair(Circle(a), Parabola(p["f"] * a, p["eps_x"] * a, p["eps_y"] * a, p["theta_cut"]))
