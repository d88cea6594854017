"""Perturbed "true" Laplacians around an estimate, and the hypotheses they must meet.

Perturbations keep the estimate's eigenvectors and move only the nonzero
eigenvalues, each by at most ``delta_bar``. The result has zero row sums
but may have positive off-diagonal entries, so it is handled as a plain
symmetric system matrix rather than a :class:`~gspconsensus.graph.Graph`.
"""

import json
from dataclasses import dataclass

import numpy as np

from .filter import BoundReport, per_period_exponent, phi_bound
from .graph import graph_from_dict, graph_to_dict, laplacian
from .spectral import Spectrum, eig_sym

SHARED_EIGENVECTORS = "shared_eigenvectors"
SPECTRAL_JITTER = "spectral_jitter"
MODES = (SHARED_EIGENVECTORS, SPECTRAL_JITTER)

JITTER_MAX_DRAWS = 10_000
DEVIATION_SLACK = 1e-9


class PerturbationError(RuntimeError):
    pass


def basis_with_consensus_mode(n):
    """Deterministic orthonormal basis whose first column is ``1/sqrt(n)``."""
    seed = np.eye(n)
    seed[:, 0] = 1.0
    q, r = np.linalg.qr(seed)
    q = q * np.sign(np.diag(r))
    return q


@dataclass(frozen=True, eq=False)
class UncertaintyModel:
    estimated: np.ndarray
    delta_bar: float
    mode: str = SHARED_EIGENVECTORS
    spectrum: Spectrum = None

    def __post_init__(self):
        est = np.array(self.estimated, dtype=float)
        est.setflags(write=False)
        object.__setattr__(self, "estimated", est)
        if self.mode not in MODES:
            raise ValueError(f"unknown perturbation mode {self.mode!r}")
        if not self.delta_bar > 0:
            raise ValueError("delta_bar must be positive")
        if self.spectrum is None:
            object.__setattr__(self, "spectrum", eig_sym(est))
        if not self.spectrum.eigenvalues[1] > 0:
            raise ValueError("estimated Laplacian must be connected (lam_2 > 0)")

    @classmethod
    def from_graph(cls, g, delta_bar, mode=SHARED_EIGENVECTORS):
        return cls(laplacian(g), delta_bar, mode)

    @classmethod
    def from_eigenvalues(cls, eigs, delta_bar, mode=SHARED_EIGENVECTORS):
        """Estimate known only through its eigenvalues.

        The eigenvectors are taken from :func:`basis_with_consensus_mode`.
        """
        lam = np.sort(np.asarray(eigs, dtype=float))
        v = basis_with_consensus_mode(lam.size)
        s = Spectrum(lam, v)
        return cls(s.reconstruct(), delta_bar, mode, s)

    @property
    def estimated_eigenvalues(self):
        return self.spectrum.eigenvalues


def perturb(model, seed=None, max_draws=JITTER_MAX_DRAWS):
    """Build a true Laplacian ``L~`` within ``delta_bar`` of the estimate.

    ``shared_eigenvectors`` shifts every nonzero eigenvalue up by exactly
    ``delta_bar`` and ignores ``seed``. ``spectral_jitter`` shifts each by
    an independent uniform draw from ``[-delta_bar, delta_bar]``,
    redrawing when the second eigenvalue would become nonpositive.
    """
    v = model.spectrum.eigenvectors
    lam = model.spectrum.eigenvalues
    n = lam.size
    if model.mode == SHARED_EIGENVECTORS:
        shift = np.r_[0.0, np.ones(n - 1)]
        return model.estimated + model.delta_bar * (v * shift) @ v.T
    if seed is None:
        raise ValueError("spectral_jitter needs a seed")
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        jitter = rng.uniform(-model.delta_bar, model.delta_bar, n - 1)
        new = np.r_[0.0, lam[1:] + jitter]
        if np.all(new[1:] > 0):
            lt = (v * new) @ v.T
            return 0.5 * (lt + lt.T)
    raise PerturbationError(
        f"no connectivity-preserving draw in {max_draws} tries; delta_bar too large for lam_2"
    )


def eigen_deviation(l_true, l_est_spectrum):
    """``max_i |lam~_i - lam_i|`` with both spectra sorted ascending."""
    true = eig_sym(l_true).eigenvalues
    est = l_est_spectrum.eigenvalues
    if true.size != est.size:
        raise ValueError("spectra have different sizes")
    return float(np.max(np.abs(true - est)))


def check_theorem2(model, l_true, target=None, x0_sq_norm=None):
    """Check the two hypotheses for the estimated-periodic schedule.

    The eigenvalue deviation must stay within ``delta_bar`` (with 1e-9
    slack) and ``phi`` must be below one. Failures are reported in
    ``checks``, never raised.
    """
    dev = eigen_deviation(l_true, model.spectrum)
    phi = phi_bound(model.estimated_eigenvalues, model.delta_bar)
    exponent = None
    if target is not None and x0_sq_norm is not None:
        exponent = per_period_exponent(phi, target, x0_sq_norm)
    return BoundReport(
        phi=phi,
        psi=None,
        contractive=phi < 1,
        per_period_exponent=exponent,
        checks={"deviation_within_delta": dev <= model.delta_bar + DEVIATION_SLACK, "phi_below_one": phi < 1},
        values={"deviation": dev, "delta_bar": model.delta_bar},
    )


def model_to_dict(model, seed=None, graph=None):
    est = graph_to_dict(graph) if graph is not None else model.estimated_eigenvalues.tolist()
    return {"estimated_graph": est, "delta_bar": model.delta_bar, "mode": model.mode, "seed": seed}


def model_from_dict(d):
    """Parse an uncertainty-model object; returns ``(model, seed)``."""
    est = d["estimated_graph"]
    mode = d.get("mode", SHARED_EIGENVECTORS)
    if isinstance(est, dict):
        model = UncertaintyModel.from_graph(graph_from_dict(est), float(d["delta_bar"]), mode)
    else:
        model = UncertaintyModel.from_eigenvalues(est, float(d["delta_bar"]), mode)
    return model, d.get("seed")


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
