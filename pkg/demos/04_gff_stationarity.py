"""
Coupling with the free field
============================

Pairing Im M with a bump function gives a Gaussian-like variable whose
variance plus the remaining Dirichlet energy stays equal to the energy
at time zero.
"""

import numpy as np

from dpplab import gff

f = gff.TestFn(2j, 0.3)
print("E_0(f) =", gff.energy0(f))

with np.errstate(all="ignore"):
    rep = gff.stationarity_check("H", 2.0, 1, f, [0.05, 0.1], 1000, seed=6)
for r in rep.rows:
    print(f"t={r.t:g}  Var={r.var:.5f}  E_t={r.energy_t:.5f}  sum={r.balance:.5f}  "
          f"E_0={r.energy_0:.5f}  mean {r.mean:.4f} vs {r.mean0:.4f}")
print("passed:", rep.passed)
