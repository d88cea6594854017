"""
Exact average consensus on a six-node ring
==========================================

The ring's Laplacian has distinct nonzero eigenvalues 1, 3 and 4. Using
their reciprocals as step sizes drives every node to the average in three
rounds.
"""

import numpy as np

from gspconsensus import design_finite_time, run_matrix
from gspconsensus.graph import cycle
from gspconsensus.spectral import distinct_nonzero_eigs, laplacian_spectrum

g = cycle(6)
spectrum = laplacian_spectrum(g)
print("eigenvalues:", np.round(spectrum.eigenvalues, 12))

distinct = distinct_nonzero_eigs(spectrum)
schedule = design_finite_time(distinct)
print("gains:", schedule.prefix)

x0 = np.random.default_rng(0).uniform(0, 1, g.n)
traj = run_matrix(x0, schedule, g, len(schedule.prefix))
for k, e in zip(traj.steps, traj.errors):
    print(f"k={k}  e={e:.3e}")
print("average", x0.mean(), "final states", traj.states[-1])
