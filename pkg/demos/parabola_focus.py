"""Circle inside a chord-closed parabola, moved along the symmetry axis.

eps_x = 0 puts the inner cylinder at the focus. The energy varies smoothly
and monotonically through it.
"""
import numpy as np

from casimir_pm.energy import GeometrySpec, SweepSpec, sweep

spec = SweepSpec(GeometrySpec("parabola", {"f": 4.0}), "eps_x", np.linspace(-1, 1, 9))
points = sweep(spec, S=14, workers=4)
values = np.array([p.result.energy_per_length for p in points])
for p, d2 in zip(points, np.r_[np.nan, np.diff(values, 2), np.nan]):
    print(f"eps_x={p.value:+.2f}  E={p.result.energy_per_length:.6e}  second diff={d2:.2e}")
