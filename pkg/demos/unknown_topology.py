"""
Consensus with only a degree bound
==================================

When only the maximum degree is known, gains T0 / (2 (T0 - k) d_bar) give a
filter whose magnitude stays below one across the whole possible spectrum.
The ring mixes faster than the path because its algebraic connectivity is
larger.
"""

import numpy as np

from gspconsensus import design_unknown_topology, psi_bound, run_matrix
from gspconsensus.filter import varphi_alpha_bound
from gspconsensus.graph import cycle, path
from gspconsensus.spectral import laplacian_spectrum

schedule = design_unknown_topology(2.0, 5)
print("gains:", np.round(schedule.prefix, 6))
print("psi:", psi_bound(2.0, 5), "varphi(alpha=2):", varphi_alpha_bound(5, 2))

x0 = np.random.default_rng(0).uniform(0, 1, 6)
for g in (cycle(6), path(6)):
    lam2 = laplacian_spectrum(g).algebraic_connectivity
    traj = run_matrix(x0, schedule, g, 25)
    ends = ", ".join(f"{e:.2e}" for _, e in traj.period_end_errors())
    print(f"{g.meta.get('kind')}: lambda_2={lam2:.4f}  period-end errors: {ends}")
