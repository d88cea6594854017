"""Symmetric eigendecomposition and the graph Fourier transform.

The eigensolver is a cyclic Jacobi rotation scheme on the dense matrix.
It is meant for Laplacians of up to a few hundred nodes.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DISTINCT_REL_TOL = 1e-8
SYMMETRY_REL_TOL = 1e-12


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(f"{msg} (off-diagonal residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float)
        vec = np.array(self.eigenvectors, dtype=float)
        if vec.shape != (lam.size, lam.size):
            raise ValueError("eigenvector matrix must be N x N for N eigenvalues")
        lam.setflags(write=False)
        vec.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", vec)

    @property
    def n(self):
        return self.eigenvalues.size

    @property
    def algebraic_connectivity(self):
        return float(self.eigenvalues[1])

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _check_symmetric(m):
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    asym = float(np.abs(m - m.T).max(initial=0.0))
    if asym > SYMMETRY_REL_TOL * scale:
        raise ValueError(f"matrix is not symmetric (max |m - m^T| = {asym:.3e})")
    return 0.5 * (m + m.T)


def _offdiag_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def eig_sym(m, tol=None, max_sweeps=100):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Parameters
    ----------
    m : (N, N) array_like
        Symmetric matrix; asymmetry above 1e-12 relative is rejected.
    tol : float, optional
        Stop once the off-diagonal Frobenius norm falls below
        ``tol * ||m||_F``. Defaults to ``N`` machine epsilons, which sits
        just above the rounding floor of the rotations.
    max_sweeps : int
        Number of full row-cyclic passes allowed before giving up.

    Returns
    -------
    Spectrum
        Eigenvalues sorted ascending; eigenvector signs are arbitrary.

    Raises
    ------
    ValueError
        Input not square or not symmetric.
    ConvergenceError
        Residual still above tolerance after ``max_sweeps`` sweeps.
    """
    a = _check_symmetric(m)
    n = a.shape[0]
    v = np.eye(n)
    if tol is None:
        tol = max(n, 1) * np.finfo(float).eps
    target = tol * float(np.linalg.norm(a))
    off = _offdiag_norm(a)
    sweeps = 0
    while off > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = _offdiag_norm(a)
    lam = np.diag(a).copy()
    order = np.argsort(lam, kind="stable")
    return Spectrum(lam[order], v[:, order], sweeps)


def laplacian_spectrum(g):
    from .graph import laplacian

    return eig_sym(laplacian(g))


def gft(s, x):
    """Graph Fourier transform ``V^T x``."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != s.n:
        raise ValueError(f"signal length {x.shape[0]} does not match N={s.n}")
    return s.eigenvectors.T @ x


def igft(s, xhat):
    """Inverse transform ``V xhat``."""
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape[0] != s.n:
        raise ValueError(f"spectral vector length {xhat.shape[0]} does not match N={s.n}")
    return s.eigenvectors @ xhat


def eigen_clusters(eigenvalues, rel_tol=DISTINCT_REL_TOL):
    """Group ascending eigenvalues whose consecutive gap is at most ``rel_tol * lambda_max``.

    Returns a list of index arrays, one per cluster.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    gap_tol = rel_tol * max(abs(lam[-1]), np.finfo(float).tiny)
    breaks = np.flatnonzero(np.diff(lam) > gap_tol) + 1
    return np.split(np.arange(lam.size), breaks)


def distinct_nonzero_eigs(s, rel_tol=DISTINCT_REL_TOL):
    """Distinct nonzero Laplacian eigenvalues, ascending.

    Each cluster of near-equal eigenvalues is represented by its mean and
    the cluster containing the smallest eigenvalue (zero) is dropped.

    Raises
    ------
    ValueError
        If the zero eigenvalue is not simple, i.e. the graph is disconnected.
    """
    lam = np.asarray(s.eigenvalues if isinstance(s, Spectrum) else s, dtype=float)
    clusters = eigen_clusters(lam, rel_tol)
    if clusters[0].size > 1:
        raise ValueError(
            f"zero eigenvalue has multiplicity {clusters[0].size}; graph is not connected"
        )
    return [float(lam[idx].mean()) for idx in clusters[1:]]


def spectrum_to_dict(s):
    return {
        "eigenvalues": s.eigenvalues.tolist(),
        "eigenvectors": s.eigenvectors.ravel(order="C").tolist(),
    }


def spectrum_from_dict(d):
    lam = np.asarray(d["eigenvalues"], dtype=float)
    vec = np.asarray(d["eigenvectors"], dtype=float).reshape(lam.size, lam.size)
    return Spectrum(lam, vec)


def save_spectrum(s, path):
    Path(path).write_text(json.dumps(spectrum_to_dict(s)) + "\n")
