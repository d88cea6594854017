"""Closed-loop consensus dynamics in matrix, agent-local and spectral form."""

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .filter import GainSchedule
from .graph import Graph, laplacian
from .spectral import Spectrum


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States ``x(k)`` and consensus errors ``e(k)`` at the recorded steps.

    With ``stride == 1`` every step ``0..t_end`` is recorded; otherwise
    ``steps`` lists the recorded time indices.
    """

    steps: np.ndarray
    states: np.ndarray
    errors: np.ndarray
    schedule: Optional[GainSchedule] = None
    graph: Optional[Graph] = None

    def __post_init__(self):
        for name in ("steps", "states", "errors"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def x0(self):
        return self.states[0]

    @property
    def t_end(self):
        return int(self.steps[-1])

    def _index(self, k):
        idx = int(np.searchsorted(self.steps, k))
        if idx == self.steps.size or self.steps[idx] != k:
            raise KeyError(f"step {k} was not recorded")
        return idx

    def state_at(self, k):
        return self.states[self._index(k)]

    def error_at(self, k):
        return float(self.errors[self._index(k)])

    def period_end_errors(self, period=None):
        """``[(k, e(k))]`` at every multiple of the control period."""
        if period is None:
            if self.schedule is None:
                raise ValueError("no schedule attached; pass period explicitly")
            period = self.schedule.horizon
        if period < 1:
            return []
        return [(int(k), float(e)) for k, e in zip(self.steps, self.errors) if k > 0 and k % period == 0]


def consensus_error(x, x0):
    """``sum_i (x_i - mean(x0))^2``."""
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x.shape != x0.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {x0.shape}")
    d = x - x0.mean()
    return float(d @ d)


def _system_matrix(g):
    if isinstance(g, Graph):
        return laplacian(g)
    m = np.asarray(g, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square system matrix, got shape {m.shape}")
    return m


def step(x, epsilon, l):
    """One protocol step ``(I - epsilon L) x``."""
    x = np.asarray(x, dtype=float)
    if l.shape != (x.size, x.size):
        raise ValueError(f"state length {x.size} does not match matrix {l.shape}")
    return x - epsilon * (l @ x)


def _recorded(k, t_end, stride, sched):
    if k == 0 or k == t_end or k % stride == 0:
        return True
    period = sched.period if sched.period is not None else len(sched.prefix)
    return period > 0 and k % period == 0


def _collect(x0, t_end, sched, stride, advance):
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if stride < 1:
        raise ValueError("stride must be positive")
    x0 = np.asarray(x0, dtype=float)
    steps, states, errors = [0], [x0.copy()], [consensus_error(x0, x0)]
    x = x0
    for k in range(t_end):
        x = advance(k, x)
        if _recorded(k + 1, t_end, stride, sched):
            steps.append(k + 1)
            states.append(x.copy())
            errors.append(consensus_error(x, x0))
    return np.array(steps), np.array(states), np.array(errors)


def run_matrix(x0, sched, g, t_end, stride=1):
    """Iterate ``x(k+1) = (I - eps_k L) x(k)``.

    ``g`` is a :class:`Graph` or any square system matrix with zero row
    sums (e.g. a perturbed Laplacian).
    """
    l = _system_matrix(g)
    if np.asarray(x0).shape != (l.shape[0],):
        raise ValueError("x0 length does not match the graph")
    steps, states, errors = _collect(
        x0, t_end, sched, stride, lambda k, x: step(x, sched.gain_at(k), l)
    )
    return Trajectory(steps, states, errors, sched, g if isinstance(g, Graph) else None)


def neighbor_table(g):
    """Per-agent ``(indices, weights)`` of incoming neighbours.

    For a graph these are the adjacency weights; for a bare system matrix
    the weights are the negated off-diagonal entries.
    """
    if isinstance(g, Graph):
        return [g.neighbors(i) for i in range(g.n)]
    m = _system_matrix(g)
    table = []
    for i in range(m.shape[0]):
        row = -m[i].copy()
        row[i] = 0.0
        idx = np.flatnonzero(row)
        table.append((idx, row[idx]))
    return table


def agent_update(x_i, epsilon, neighbor_states, neighbor_weights):
    """New state of one agent from its own state and its neighbours' messages."""
    return x_i + epsilon * float(np.dot(neighbor_weights, neighbor_states - x_i))


def run_local(x0, sched, g, t_end, stride=1):
    """Synchronous message-passing simulation.

    In each round every agent receives the current states of its
    neighbours only, then all agents update at once.
    """
    table = neighbor_table(g)
    if np.asarray(x0).shape != (len(table),):
        raise ValueError("x0 length does not match the graph")

    def advance(k, x):
        eps = sched.gain_at(k)
        new = np.empty_like(x)
        for i, (nbrs, w) in enumerate(table):
            messages = x[nbrs]
            new[i] = agent_update(x[i], eps, messages, w)
        return new

    steps, states, errors = _collect(x0, t_end, sched, stride, advance)
    return Trajectory(steps, states, errors, sched, g if isinstance(g, Graph) else None)


def run_spectral(x0, sched, s, t_end, stride=1):
    """States from the filter: ``x(k) = V diag(h(lam_i, k)) V^T x0``."""
    if not isinstance(s, Spectrum):
        raise TypeError("run_spectral needs a Spectrum")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (s.n,):
        raise ValueError("x0 length does not match the spectrum")
    v = s.eigenvectors
    lam = s.eigenvalues
    xhat = v.T @ x0
    h = np.ones_like(lam)

    def advance(k, x):
        nonlocal h
        h = h * (1.0 - sched.gain_at(k) * lam)
        return v @ (h * xhat)

    steps, states, errors = _collect(x0, t_end, sched, stride, advance)
    return Trajectory(steps, states, errors, sched, None)


def write_trajectory_csv(traj, path):
    """Write ``k,x_0,...,x_{N-1},e`` rows using shortest round-trip float text."""
    n = traj.states.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k"] + [f"x_{i}" for i in range(n)] + ["e"])
        for k, x, e in zip(traj.steps, traj.states, traj.errors):
            w.writerow([int(k)] + [repr(float(v)) for v in x] + [repr(float(e))])


def read_trajectory_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "k" or header[-1] != "e":
        raise ValueError("not a trajectory CSV")
    steps = np.array([int(r[0]) for r in body])
    states = np.array([[float(v) for v in r[1:-1]] for r in body])
    errors = np.array([float(r[-1]) for r in body])
    return Trajectory(steps, states, errors)
