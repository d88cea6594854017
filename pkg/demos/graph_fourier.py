"""
Graph Fourier view of a consensus run
=====================================

Each step multiplies the k-th spectral coefficient by (1 - eps * lambda_k).
Watching the coefficients shows which modes die first.
"""

import numpy as np

from gspconsensus import design_finite_time
from gspconsensus.graph import laplacian, path
from gspconsensus.simulate import run_spectral
from gspconsensus.spectral import distinct_nonzero_eigs, gft, laplacian_spectrum

g = path(6)
s = laplacian_spectrum(g)
print("eigenvalues:", np.round(s.eigenvalues, 6))
print("reconstruction error:", np.abs(s.reconstruct() - laplacian(g)).max())

schedule = design_finite_time(distinct_nonzero_eigs(s))
x0 = np.arange(6.0)
traj = run_spectral(x0, schedule, s, len(schedule.prefix))
np.set_printoptions(precision=4, suppress=True)
for k, x in zip(traj.steps, traj.states):
    print(k, gft(s, x))
