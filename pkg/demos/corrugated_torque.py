"""Corrugated cylinders: cos(nu phi0) amplitude and torque.

Both cylinders carry h sin(nu theta) corrugations; the outer one is rotated
by phi0. The TM energy oscillates as Ebar + A cos(nu phi0). A is compared
with the second-order perturbative amplitude.
"""
import math
import warnings

import numpy as np

from casimir_pm.cli import fit_amplitude
from casimir_pm.energy import GeometrySpec, SweepSpec, sweep, torque
from casimir_pm.oracles import perturbative_amplitude

nu, alpha, S = 3, 2.0, 18
period = 2 * math.pi / nu
phi = np.arange(8) * period / 8
warnings.simplefilter("ignore", RuntimeWarning)
for h in (0.01, 0.05, 0.1):
    geom = GeometrySpec("corrugated", {"b": alpha, "h": h, "nu": nu})
    pts = sweep(SweepSpec(geom, "phi0", phi), S=S, polarizations="TM", rel_tol=1e-9)
    energy = [p.result.energy_per_length for p in pts]
    amp, resid = fit_amplitude(np.append(phi, period), np.append(energy, energy[0]), nu)
    pert = perturbative_amplitude(nu, alpha, h)
    print(f"h={h:<5} A_fit={amp:.5e}  A_pert={pert:.5e}  ratio={amp / pert:.4f}  rms={resid:.1e}")

geom = GeometrySpec("corrugated", {"b": alpha, "h": 0.05, "nu": nu})
print("torque per unit length, h=0.05:")
for p0 in np.linspace(0, period, 5):
    print(f"  phi0={p0:.4f}  T={torque(geom, p0, S=12, polarizations='TM'): .5e}")
