"""
Correlation kernels and counting laws
=====================================

A projection kernel fixes the number of points and its diagonal is the
one-point density.  Its restriction to a half-line decides how many GUE
eigenvalues land there.
"""

import numpy as np

from dpplab import dpp, kernels as K
from dpplab.kernels import KernelSpec

# the Hermite kernel for N = 8, in Christoffel-Darboux and direct-sum form
spec = KernelSpec.hermite(8)
x = np.linspace(-4, 4, 9)
cd = K.eval_kernel(spec, x, x[::-1])
direct = K.hermite_direct(8, x, x[::-1])
print("max relative |CD - direct| =", np.max(np.abs(cd - direct) / np.abs(direct)))

# the density integrates to N
grid = np.linspace(-8, 8, 4001)
rho = np.real(K.lebesgue_kernel(spec, grid, grid))
print("integral of the density =", np.sum(rho) * (grid[1] - grid[0]))

# number of eigenvalues in [0, inf): sampled vs the Gram eigenvalue law
samples = dpp.sample_gue_batch(8, 20000, seed=1)
law = dpp.counting_law(dpp.gram_restriction("hermite", 8, 0.0))
counts = (samples >= 0).sum(axis=1)
emp = dpp.empirical_law(counts, len(law.pmf) - 1)
for k, (a, b) in enumerate(zip(emp, law.pmf)):
    print(f"k={k}  empirical {a:.4f}  exact {b:.4f}")
print("total variation =", dpp.total_variation(emp, law.pmf))
