"""
Loewner chains
==============

Constant driving grows a vertical slit, linear-in-sqrt(t) driving grows
a straight slit at an angle.  Driving by a Dyson gas gives a multiple
SLE whose observable M has constant mean.
"""

import math

import numpy as np

from dpplab import loggas, sle

tr = sle.trace_slit(sle.DrivingPath.constant(0.0, 1.0, 200))
print("vertical slit tip at t=1:", tr.tips[-1, 0], "(exact 2i)")

for alpha in (1 / 3, 2 / 3):
    tip = sle.trace_slit(sle.tilted_driving(alpha, 1.0, 1000)).tips[-1, 0]
    print(f"alpha={alpha:.3f}  angle/pi={np.angle(tip) / math.pi:.4f}  tip {tip:.4f}")

# two-slit SLE_2 driven by a Dyson gas
kappa = 2.0
cfg = loggas.GasConfig.from_kappa("dyson", 2, kappa, initial=[-0.5, 0.5])
d = sle.DrivingPath.from_gas(cfg, 0.5, 100, seed=5, replicas=2000)
with np.errstate(all="ignore"):
    s = sle.forward_flow(d, np.array([2j]))
    M0 = sle.martingale_observable(s, kappa, 0)[:, 0]
    for k in (25, 50, 100):
        dm = sle.martingale_observable(s, kappa, k)[:, 0] - M0
        dm = dm[np.isfinite(dm)]
        print(f"t={d.times[k]:.3f}  E[M_t - M_0] = {dm.mean():.4f}  "
              f"(se {dm.real.std() / math.sqrt(len(dm)):.4f})")
