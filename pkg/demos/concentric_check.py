"""Point matching against the exact mode sum for concentric cylinders.

For circles the collocation system is diagonal in the angular modes, so the
pipeline at cutoff S must reproduce the mode sum truncated at |m| <= S.
The gap to the fully converged sum shows how many modes a radius ratio needs.
"""
from casimir_pm import casimir_energy, make_pair
from casimir_pm.oracles import concentric_te, concentric_tm

S = 10
print(f"{'alpha':>5} {'pol':>3} {'pipeline':>16} {'|m|<=S sum':>16} {'all modes':>16}")
for alpha in (1.5, 2.0, 3.0, 4.0):
    res = casimir_energy(make_pair("circle", b=alpha), S=S, rel_tol=1e-10)
    for pol, oracle, value in (("TM", concentric_tm, res.tm), ("TE", concentric_te, res.te)):
        truncated = oracle(1.0, alpha, m_max=S)
        full = oracle(1.0, alpha)
        print(f"{alpha:5.1f} {pol:>3} {value:16.10e} {truncated:16.10e} {full:16.10e}")
