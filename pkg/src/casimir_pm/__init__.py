"""Casimir interaction energy between nested perfectly conducting cylinders
of star-shaped cross section, computed by point matching on the imaginary
frequency axis."""

from .energy import (EnergyResult, GeometrySpec, SweepPoint, SweepSpec, casimir_energy,
                     sweep, torque)
from .errors import (CasimirError, ConfigError, DomainError, InvariantViolation,
                     NonConvergence, SingularCollocation, StarShapeViolation)
from .geometry import (BoundaryCurve, Circle, CorrugatedCircle, CurvePair, EccentricCircle,
                       Ellipse, Parabola, PointGrid, make_pair, outward_normal,
                       radial_profile, sample_points)
from .kernel import CollocationKernel, Polarization, assemble, log_q, q_imag_residual
from .oracles import (b_nu, concentric_te, concentric_tm, d_m, perturbative_amplitude,
                      pfa_energy)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCurve", "Circle", "EccentricCircle", "CorrugatedCircle", "Ellipse", "Parabola",
    "CurvePair", "PointGrid", "make_pair", "radial_profile", "outward_normal", "sample_points",
    "Polarization", "CollocationKernel", "assemble", "log_q", "q_imag_residual",
    "EnergyResult", "GeometrySpec", "SweepSpec", "SweepPoint", "casimir_energy", "sweep",
    "torque", "concentric_tm", "concentric_te", "d_m", "b_nu", "perturbative_amplitude",
    "pfa_energy", "CasimirError", "DomainError", "StarShapeViolation", "SingularCollocation",
    "NonConvergence", "InvariantViolation", "ConfigError",
]
