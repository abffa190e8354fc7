"""Interaction energy per unit length, torque and parameter sweeps.

The energy of the two conductors per unit length is

    E / L = (1 / 4 pi) * integral_0^inf  y ln Q(iy) dy

evaluated separately for each requested polarization with the adaptive
quadrature of :mod:`casimir_pm.quadrature`.  With ``hbar = c = 1`` it carries
units of inverse length squared in whatever length unit the geometry uses.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import CasimirError, InvariantViolation
from .geometry import PAIR_PARAMS, CurvePair, make_pair
from .kernel import CollocationKernel, Polarization
from .quadrature import integrate_decaying

__all__ = [
    "EnergyResult",
    "casimir_energy",
    "parse_polarizations",
    "torque",
    "GeometrySpec",
    "SweepSpec",
    "SweepPoint",
    "sweep",
    "UNITS",
    "to_units",
]

# reality tolerance on Im ln Q relative to max(1, |Re ln Q|)
REALITY_TOL = 1e-8
UNITS = ("per_a2", "per_4pi_a2")


def to_units(value, unit, a=1.0):
    """Express an energy per unit length in one of the display conventions:
    ``E a^2 / L`` (``per_a2``) or ``E 4 pi a^2 / L`` (``per_4pi_a2``)."""
    if unit == "per_a2":
        return value * a * a
    if unit == "per_4pi_a2":
        return value * 4.0 * math.pi * a * a
    raise ValueError(f"unknown unit {unit!r}; expected one of {UNITS}")


@dataclass
class EnergyResult:
    """Energy per unit length with quadrature diagnostics.

    ``parts`` maps polarization names (``"TM"``, ``"TE_radial"``,
    ``"TE_normal"``) to their contributions; ``energy_per_length`` is their
    sum.  ``im_residual`` is the largest ``|Im ln Q| / max(1, |Re ln Q|)``
    seen at any node.
    """

    energy_per_length: float
    parts: dict
    quadrature_error: float
    im_residual: float
    nodes: int
    y_max: float
    S: int
    scale: float = 1.0
    part_errors: dict = field(default_factory=dict)

    @property
    def tm(self):
        return self.parts.get("TM")

    @property
    def te(self):
        for key in ("TE_radial", "TE_normal"):
            if key in self.parts:
                return self.parts[key]
        return None

    def in_units(self, unit="per_a2"):
        return to_units(self.energy_per_length, unit, self.scale)


def parse_polarizations(value, te_mode="radial"):
    """Normalize ``"both"``, ``"TM"``, ``"TE"`` or a sequence of names."""
    te = Polarization.TE_NORMAL if te_mode == "normal" else Polarization.TE_RADIAL
    if isinstance(value, (str, Polarization)):
        key = str(getattr(value, "value", value)).strip().lower()
        if key == "both":
            return (Polarization.TM, te)
        if key == "te":
            return (te,)
        return (Polarization.parse(value),)
    pols = tuple(Polarization.parse(v) for v in value)
    if not pols:
        raise ValueError("no polarization requested")
    return pols


class _Integrand:
    """``y ln Q(iy) / 4 pi`` with invariant checks on every node."""

    def __init__(self, kernel: CollocationKernel, strict: bool):
        self.kernel = kernel
        self.strict = strict
        self.max_im = 0.0
        self.max_re = -math.inf

    def __call__(self, y):
        re, im = self.kernel.evaluate(y)
        rel_im = im / np.maximum(1.0, np.abs(re))
        self.max_im = max(self.max_im, float(rel_im.max()))
        self.max_re = max(self.max_re, float(re.max()))
        if self.strict:
            if np.any(re > 0.0):
                j = int(np.argmax(re))
                raise InvariantViolation(
                    f"Re ln Q = {re[j]:.3g} > 0 at y = {y[j]:.6g} ({self.kernel.pol.value})")
            if np.any(rel_im > REALITY_TOL):
                j = int(np.argmax(rel_im))
                raise InvariantViolation(
                    f"|Im ln Q| = {im[j]:.3g} exceeds tolerance at y = {y[j]:.6g}")
        return y * re / (4.0 * math.pi)


def casimir_energy(pair: CurvePair, S: int = 18, polarizations="both", te_mode="radial",
                   rel_tol: float = 1e-6, y_max=None, y_min=None,
                   deterministic_sum: bool = False, max_nodes: int = 200_000,
                   strict: bool = True) -> EnergyResult:
    """Casimir interaction energy per unit length of a nested pair.

    Parameters
    ----------
    pair : CurvePair
        Geometry; lengths in any unit, the result is in that unit^-2.
    S : int
        Mode cutoff (``2S + 1`` collocation points per curve).
    polarizations : str or sequence
        ``"both"`` (TM + TE), ``"TM"``, ``"TE"`` or explicit names.
    te_mode : {"radial", "normal"}
        Which derivative ``"TE"`` and ``"both"`` refer to.
    rel_tol : float
        Relative quadrature tolerance per polarization.
    y_max : float or None
        Fixed upper limit of the frequency integral, or automatic.
    y_min : float or None
        Lower end of the integral; defaults to ``1e-6`` over the inner scale.
    deterministic_sum : bool
        Use an order-independent summation of panel contributions.
    strict : bool
        Raise :class:`InvariantViolation` when a node gives ``Re ln Q > 0``
        or a non-negligible imaginary part.

    Returns
    -------
    EnergyResult
    """
    if int(S) < 1:
        raise ValueError("S must be at least 1")
    if y_max is not None and not y_max > 0:
        raise ValueError("y_max must be positive")
    pols = parse_polarizations(polarizations, te_mode)
    scale = pair.scale
    if y_min is None:
        y_min = 1e-6 / scale
    grids = pair.grids(int(S))
    gap = pair.gap
    parts, errors = {}, {}
    nodes, upper, max_im = 0, 0.0, 0.0
    for pol in pols:
        integrand = _Integrand(CollocationKernel(pair, int(S), pol, grids=grids), strict)
        q = integrate_decaying(integrand, gap, rel_tol=rel_tol, y_min=y_min, y_max=y_max,
                               max_nodes=max_nodes, deterministic_sum=deterministic_sum)
        parts[pol.value] = q.value
        errors[pol.value] = q.error
        nodes += q.nodes
        upper = max(upper, q.y_max)
        max_im = max(max_im, integrand.max_im)
    total = math.fsum(parts.values()) if deterministic_sum else sum(parts.values())
    return EnergyResult(energy_per_length=total, parts=parts,
                        quadrature_error=math.fsum(errors.values()), im_residual=max_im,
                        nodes=nodes, y_max=upper, S=int(S), scale=scale, part_errors=errors)


@dataclass(frozen=True)
class GeometrySpec:
    """Outer kind plus dimensionless parameters, as accepted by
    :func:`casimir_pm.geometry.make_pair`."""

    kind: str
    params: Mapping

    def __post_init__(self):
        if self.kind not in PAIR_PARAMS:
            raise ValueError(f"unknown outer kind {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))

    def pair(self, a=1.0):
        return make_pair(self.kind, a=a, **self.params)

    def with_params(self, **updates):
        return GeometrySpec(self.kind, {**self.params, **updates})


# sweep axes and the geometry parameter each one moves
_AXIS_PARAM = {"delta": "eps_x", "alpha": "b", "phi0": "phi0", "eps_x": "eps_x", "eps_y": "eps_y"}
SWEEP_AXES = tuple(_AXIS_PARAM)


def _axis_param(kind, axis):
    try:
        name = _AXIS_PARAM[axis]
    except KeyError:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}") from None
    if name not in PAIR_PARAMS[kind]:
        raise ValueError(f"axis {axis!r} does not apply to outer kind {kind!r}")
    return name


def torque(geometry: GeometrySpec, phi0: float, step=None, **energy_kwargs) -> float:
    """Torque per unit length, ``-dE/dphi0`` by central differences.

    ``geometry`` must be a corrugated configuration; its own ``phi0`` is
    replaced.  The default step is ``pi / (50 nu)``.
    """
    if geometry.kind != "corrugated":
        raise ValueError("torque needs a corrugated geometry")
    nu = int(geometry.params["nu"])
    if step is None:
        step = math.pi / (50.0 * nu)
    if not step > 0:
        raise ValueError("step must be positive")
    plus = casimir_energy(geometry.with_params(phi0=phi0 + step).pair(), **energy_kwargs)
    minus = casimir_energy(geometry.with_params(phi0=phi0 - step).pair(), **energy_kwargs)
    return -(plus.energy_per_length - minus.energy_per_length) / (2.0 * step)


@dataclass(frozen=True)
class SweepSpec:
    """One geometry parameter varied over ``values``.

    ``baseline`` holds parameter overrides defining a reference geometry
    whose energy is subtracted from every point, e.g. ``{"eps_x": 0.0}``
    for the eccentric-minus-concentric difference.
    """

    geometry: GeometrySpec
    axis: str
    values: Sequence[float]
    baseline: Mapping | None = None

    def __post_init__(self):
        _axis_param(self.geometry.kind, self.axis)
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("sweep needs at least one value")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("sweep values must be finite")
        object.__setattr__(self, "values", vals)

    def point(self, value):
        return self.geometry.with_params(**{_axis_param(self.geometry.kind, self.axis): value})


@dataclass
class SweepPoint:
    value: float
    result: EnergyResult | None
    delta: float | None = None
    error: str | None = None

    @property
    def ok(self):
        return self.result is not None


def _safe_energy(geometry, kwargs):
    try:
        return casimir_energy(geometry.pair(), **kwargs), None
    except (CasimirError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def sweep(spec: SweepSpec, workers: int = 1, **energy_kwargs) -> list[SweepPoint]:
    """Energy at every sweep value; failures are recorded, not raised.

    Points may be evaluated on a thread pool (``workers > 1``); the output
    is always in input order.
    """
    geoms = [spec.point(v) for v in spec.values]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda g: _safe_energy(g, energy_kwargs), geoms))
    else:
        outcomes = [_safe_energy(g, energy_kwargs) for g in geoms]

    reference = None
    if spec.baseline is not None:
        base, err = _safe_energy(spec.geometry.with_params(**spec.baseline), energy_kwargs)
        if base is None:
            raise CasimirError(f"baseline geometry failed: {err}")
        reference = base.energy_per_length

    points = []
    for value, (res, err) in zip(spec.values, outcomes):
        delta = None
        if res is not None and reference is not None:
            delta = res.energy_per_length - reference
        points.append(SweepPoint(value=value, result=res, delta=delta, error=err))
    return points
