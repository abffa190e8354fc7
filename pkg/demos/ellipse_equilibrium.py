"""Circle inside an ellipse: the centred position is a local energy maximum.

The energy is even in each offset and decreases whichever way the inner
cylinder moves, so the symmetric configuration is unstable.
"""
import numpy as np

from casimir_pm import casimir_energy, make_pair

offsets = np.linspace(-0.3, 0.3, 7)
for axis in ("eps_x", "eps_y"):
    print(axis)
    for eps in offsets:
        pair = make_pair("ellipse", b1=4.0, b2=4.33, **{axis: eps})
        print(f"  {eps:+.2f}  E={casimir_energy(pair, S=14).energy_per_length:.8e}")
