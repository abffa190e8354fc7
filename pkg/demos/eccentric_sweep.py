"""Energy change as the inner cylinder moves off axis.

dE(delta) = E(delta) - E(0) at fixed radius ratio. The concentric position
is an unstable equilibrium: the energy drops as the cylinders approach.
"""
import numpy as np

from casimir_pm.energy import GeometrySpec, SweepSpec, sweep

deltas = np.linspace(0.0, 0.8, 9)
for alpha in (2.0, 3.0):
    spec = SweepSpec(GeometrySpec("eccentric", {"b": alpha}), "delta", deltas,
                     baseline={"eps_x": 0.0})
    print(f"alpha = {alpha}")
    for pt in sweep(spec, S=14, workers=4):
        print(f"  delta={pt.value:4.2f}  E={pt.result.energy_per_length: .8e}  dE={pt.delta: .4e}")
