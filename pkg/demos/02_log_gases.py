"""
Noncolliding log-gases
======================

Dyson and Bru-Wishart gases are run with adaptive steps that shrink with
the smallest gap.  From the origin their time-t law is a dilated
Hermite or Laguerre ensemble.
"""

import math

import numpy as np

from dpplab import dpp, loggas, kernels as K
from dpplab.kernels import KernelSpec

# Dyson gas from N copies of the origin
cfg = loggas.GasConfig("dyson", 4)
tr = loggas.simulate(cfg, 1.0, 1e-2, seed=3, replicas=5000)
print("collisions:", tr.collisions, " mean adaptive steps:", tr.steps.mean())

edges = np.linspace(-6, 6, 13)
est = dpp.estimate_correlation(tr.at(1.0), 1, edges)
ref_spec = K.transform_kernel(KernelSpec.hermite(4), "dilate", math.sqrt(2.0))
ref = dpp.bin_average(lambda q: np.real(K.lebesgue_kernel(ref_spec, q, q)), edges)
for lo, a, b in zip(edges[:-1], est.value, ref):
    print(f"[{lo:+.0f}, {lo + 1:+.0f})  simulated {a:.3f}  kernel {b:.3f}")

# the trace of a Bru-Wishart gas grows linearly in time
bw = loggas.GasConfig("bru_wishart", 3, nu=0.5, initial=[0.5, 1.0, 2.0])
tb = loggas.simulate(bw, 1.0, 1e-2, seed=4, replicas=5000)
s = tb.at(1.0).sum(axis=1)
print("E[sum] =", s.mean(), "+/-", s.std() / math.sqrt(len(s)), " theory", 3.5 + 2 * 3 * 3.5)
