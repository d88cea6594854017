"""Graph-spectral design and simulation of discrete-time average consensus."""

from .filter import (
    BoundReport,
    GainSchedule,
    design_estimated_periodic,
    design_finite_time,
    design_unknown_topology,
    filter_response,
    phi_bound,
    psi_bound,
    varphi_alpha_bound,
)
from .graph import Graph, generate, is_connected, laplacian, max_degree
from .simulate import Trajectory, consensus_error, run_local, run_matrix, run_spectral, step
from .spectral import Spectrum, distinct_nonzero_eigs, eig_sym, gft, igft, laplacian_spectrum
from .uncertainty import UncertaintyModel, check_theorem2, eigen_deviation, perturb

__version__ = "0.1.0"
