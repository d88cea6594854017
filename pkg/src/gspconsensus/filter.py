"""Protocol filters, gain-schedule synthesis and consensus error bounds.

A gain schedule ``eps_0, eps_1, ...`` applied through
``x(k+1) = (I - eps_k L) x(k)`` acts on each Laplacian mode as the
polynomial ``h(lam, t) = prod_{k<t} (1 - eps_k lam)``. Consensus at time
``t`` means ``h(0, t) = 1`` and ``h(lam_i, t) = 0`` on every nonzero
eigenvalue.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

FINITE_TIME = "finite_time"
ESTIMATED_PERIODIC = "estimated_periodic"
UNKNOWN_TOPOLOGY = "unknown_topology"
CUSTOM = "custom"
PROVENANCES = (FINITE_TIME, ESTIMATED_PERIODIC, UNKNOWN_TOPOLOGY, CUSTOM)

PSI_GRID_POINTS = 100_001
PSI_REFINE_TOL = 1e-10


@dataclass(frozen=True)
class GainSchedule:
    """Finite or periodic sequence of control gains.

    A finite schedule (``period=None``) is zero after its prefix, which
    freezes the state. A periodic schedule repeats its prefix forever.
    """

    prefix: tuple
    period: Optional[int] = None
    provenance: str = CUSTOM

    def __post_init__(self):
        prefix = tuple(float(e) for e in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.period is not None:
            if self.period < 1 or len(prefix) != self.period:
                raise ValueError(
                    f"periodic schedule needs prefix length == period, "
                    f"got {len(prefix)} and {self.period}"
                )
        if not all(math.isfinite(e) for e in prefix):
            raise ValueError("gains must be finite")

    def gain_at(self, k):
        if k < 0:
            raise ValueError("time index must be nonnegative")
        if self.period is not None:
            return self.prefix[k % self.period]
        return self.prefix[k] if k < len(self.prefix) else 0.0

    def gains(self, t):
        """Array of the first ``t`` gains."""
        return np.array([self.gain_at(k) for k in range(t)], dtype=float)

    @property
    def horizon(self):
        """Length of one control period, or of the finite prefix."""
        return self.period if self.period is not None else len(self.prefix)

    def to_dict(self):
        return {"prefix": list(self.prefix), "period": self.period, "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["prefix"]), d.get("period"), d.get("provenance", CUSTOM))


def load_schedule(path):
    with open(path) as fh:
        return GainSchedule.from_dict(json.load(fh))


def save_schedule(sched, path):
    Path(path).write_text(json.dumps(sched.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class BoundReport:
    """Outcome of a bound computation.

    ``phi`` is the headline contraction factor and ``contractive`` is
    ``phi < 1``. ``checks`` holds named hypothesis checks and ``values``
    any supporting numbers.
    """

    phi: float
    psi: Optional[float] = None
    contractive: bool = False
    per_period_exponent: Optional[int] = None
    checks: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.contractive and all(self.checks.values())

    def to_dict(self):
        return {
            "phi": self.phi,
            "psi": self.psi,
            "contractive": self.contractive,
            "per_period_exponent": self.per_period_exponent,
            "checks": dict(self.checks),
            "values": dict(self.values),
        }


def filter_response(sched, lam, t):
    """Evaluate ``h(lam, t) = prod_{k=0}^{t-1} (1 - eps_k * lam)``.

    ``lam`` may be a scalar or an array; ``t = 0`` gives 1.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    gains = sched.gains(t)
    lam_arr = np.asarray(lam, dtype=float)
    h = np.ones_like(lam_arr)
    for e in gains:
        h = h * (1.0 - e * lam_arr)
    return float(h) if h.ndim == 0 else h


def design_finite_time(distinct_nonzero):
    """Gains ``1/lam_{p+1}, 1/lam_p, ..., 1/lam_2`` reaching consensus at ``t = p``.

    Takes the distinct nonzero eigenvalues, ascending.
    """
    lam = np.asarray(distinct_nonzero, dtype=float)
    if lam.size == 0:
        raise ValueError("need at least one nonzero eigenvalue")
    if np.any(lam <= 0):
        raise ValueError("eigenvalues must be positive")
    if np.any(np.diff(lam) <= 0):
        raise ValueError("eigenvalues must be strictly ascending")
    return GainSchedule(tuple(1.0 / lam[::-1]), None, FINITE_TIME)


def design_estimated_periodic(estimated_eigs):
    """Periodic gains ``1/lam_N, ..., 1/lam_2`` from an estimated spectrum.

    Uses every nonzero eigenvalue with multiplicity, so the period is
    ``N - 1``.
    """
    lam = np.asarray(estimated_eigs, dtype=float)
    if lam.size < 2:
        raise ValueError("need at least two eigenvalues")
    if np.any(np.diff(lam) < 0):
        raise ValueError("eigenvalues must be ascending")
    if lam[1] <= 0:
        raise ValueError("second eigenvalue must be positive (estimated graph disconnected)")
    return GainSchedule(tuple(1.0 / lam[:0:-1]), lam.size - 1, ESTIMATED_PERIODIC)


def design_unknown_topology(d_bar, t0):
    """Periodic gains ``t0 / (2 (t0 - k) d_bar)`` for ``k = 0..t0-1``.

    The zeros of the resulting filter split ``[0, 2 d_bar]`` into ``t0``
    equal intervals.
    """
    if not d_bar > 0:
        raise ValueError("maximum degree must be positive")
    if int(t0) != t0 or t0 < 1:
        raise ValueError("t0 must be a positive integer")
    t0 = int(t0)
    gains = tuple(t0 / (2.0 * (t0 - k) * d_bar) for k in range(t0))
    return GainSchedule(gains, t0, UNKNOWN_TOPOLOGY)


def phi_bound(estimated_eigs, delta_bar):
    """Per-period squared-error factor under eigenvalue uncertainty.

    ``phi = (d/lam_2)^2 * prod_{i>=3} (1 - (lam_2 + d)/lam_i)^2`` with
    ``d = delta_bar``; the product is empty for ``N = 2``.
    """
    lam = np.asarray(estimated_eigs, dtype=float)
    if lam.size < 2 or lam[1] <= 0:
        raise ValueError("need lam_2 > 0")
    if not delta_bar > 0:
        raise ValueError("delta_bar must be positive")
    lam2 = lam[1]
    phi = (delta_bar / lam2) ** 2
    for lk in lam[2:]:
        phi *= (1.0 - (lam2 + delta_bar) / lk) ** 2
    return float(phi)


def _golden_max(f, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd)


def psi_bound(d_bar, t0, grid_points=PSI_GRID_POINTS, refine_tol=PSI_REFINE_TOL):
    """Largest ``|h(lam, t0)|`` over ``(0, 2 d_bar]`` for the unknown-topology schedule.

    The maximum is located on a uniform grid that excludes 0 and then
    refined by golden-section search between the neighbours of the best
    grid point. The search never goes below the first grid point, since
    ``|h| -> 1`` as ``lam -> 0``.
    """
    sched = design_unknown_topology(d_bar, t0)
    top = 2.0 * d_bar
    grid = top * np.arange(1, grid_points + 1) / grid_points
    vals = np.abs(filter_response(sched, grid, sched.period))
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        f = lambda x: abs(filter_response(sched, x, sched.period))
        best = max(best, _golden_max(f, lo, hi, refine_tol * top))
    return best


def varphi_alpha_bound(t0, alpha):
    """``max{1 - ln(t0 + 1)/alpha, 1/(2 t0)}``.

    Bounds ``|h|`` per period once ``lam_2 >= 2 d_bar / (alpha t0)``.
    Check :func:`varphi_alpha_contractive` before relying on it.
    """
    if int(t0) != t0 or t0 < 1:
        raise ValueError("t0 must be a positive integer")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return max(1.0 - math.log(t0 + 1) / alpha, 1.0 / (2 * t0))


def varphi_alpha_contractive(t0, alpha):
    first = 1.0 - math.log(t0 + 1) / alpha
    return first > -1.0 and abs(varphi_alpha_bound(t0, alpha)) < 1.0


def per_period_exponent(factor, target, x0_sq_norm):
    """Periods ``j`` needed so that ``factor**j * ||x0||^2 <= target``.

    ``factor`` is the per-period squared-error contraction. Returns None
    when the factor does not contract.
    """
    if not 0 <= factor < 1:
        return None
    if target >= x0_sq_norm:
        return 0
    if factor == 0:
        return 1
    return max(0, math.ceil(math.log(target / x0_sq_norm) / math.log(factor)))
