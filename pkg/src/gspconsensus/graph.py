"""Undirected weighted graphs: construction, Laplacian, degrees, connectivity."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

ER_MAX_ATTEMPTS = 1000


class GraphError(ValueError):
    """Invalid graph data or generator arguments."""


class GenerationError(GraphError):
    """A random generator hit its retry cap."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph on ``n`` agents with a symmetric nonnegative adjacency.

    Unweighted edges carry weight 1.0. The adjacency array is stored
    read-only; build a new ``Graph`` to change it.
    """

    n: int
    weights: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if self.n < 2:
            raise GraphError(f"need at least 2 agents, got n={self.n}")
        if w.shape != (self.n, self.n):
            raise GraphError(f"weights shape {w.shape} does not match n={self.n}")
        if not np.all(np.isfinite(w)):
            raise GraphError("weights must be finite")
        if np.any(w < 0):
            raise GraphError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise GraphError("self-loops are not allowed")
        if not np.array_equal(w, w.T):
            raise GraphError("weights must be symmetric")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.weights, other.weights)

    __hash__ = None

    @classmethod
    def from_edges(cls, n, edges, meta=None):
        """Build a graph from ``(i, j)`` or ``(i, j, w)`` tuples."""
        w = np.zeros((n, n))
        for e in edges:
            i, j = int(e[0]), int(e[1])
            wt = float(e[2]) if len(e) > 2 else 1.0
            w[i, j] = w[j, i] = wt
        return cls(n, w, dict(meta or {}))

    def edges(self):
        """List of ``(i, j, w)`` with ``i < j`` and ``w > 0``."""
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def neighbors(self, i):
        """Indices and weights of the neighbours of agent ``i``."""
        row = self.weights[i]
        idx = np.flatnonzero(row > 0)
        return idx, row[idx]


def degrees(g):
    return g.weights.sum(axis=1)


def laplacian(g):
    """Return ``D - A``; symmetric with zero row sums."""
    return np.diag(degrees(g)) - g.weights


def max_degree(g):
    return float(degrees(g).max())


def is_connected(g):
    """Connectivity of the graph induced by strictly positive weights."""
    ncomp = connected_components(g.weights > 0, directed=False, return_labels=False)
    return ncomp == 1


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], {"kind": "cycle"})


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], {"kind": "path"})


def complete(n):
    w = np.ones((n, n)) - np.eye(n)
    return Graph(n, w, {"kind": "complete"})


def star(n):
    return Graph.from_edges(n, [(0, i) for i in range(1, n)], {"kind": "star"})


def erdos_renyi(n, p, seed, max_attempts=ER_MAX_ATTEMPTS):
    """Connected G(n, p) sample.

    Attempt ``a`` draws from the stream seeded by ``(seed, a)``, so the
    result depends only on ``(n, p, seed)``. Disconnected draws are
    discarded; the number of discarded draws is kept in ``meta["retries"]``.
    """
    if not 0 < p <= 1:
        raise GraphError(f"edge probability must lie in (0, 1], got {p}")
    iu = np.triu_indices(n, 1)
    for attempt in range(max_attempts):
        rng = np.random.default_rng([seed, attempt])
        w = np.zeros((n, n))
        w[iu] = (rng.random(len(iu[0])) < p).astype(float)
        w = w + w.T
        g = Graph(n, w, {"kind": "erdos_renyi", "p": p, "seed": seed, "retries": attempt})
        if is_connected(g):
            return g
    raise GenerationError(
        f"no connected G({n}, {p}) sample in {max_attempts} attempts; p is too small"
    )


_GENERATORS = {"cycle": cycle, "path": path, "complete": complete, "star": star}


def generate(kind, n, p=None, seed=None, max_attempts=ER_MAX_ATTEMPTS):
    """Generate a named graph family.

    Parameters
    ----------
    kind : {"cycle", "path", "complete", "star", "erdos_renyi"}
        ``"er"`` is accepted as an alias of ``"erdos_renyi"``.
    n : int
        Number of agents, at least 2.
    p, seed : float, int
        Edge probability and seed; required for ``erdos_renyi`` only.
    """
    if n < 2:
        raise GraphError(f"need at least 2 agents, got n={n}")
    if kind in ("erdos_renyi", "er"):
        if p is None or seed is None:
            raise GraphError("erdos_renyi needs both p and seed")
        return erdos_renyi(n, p, seed, max_attempts)
    if kind == "cycle" and n < 3:
        return path(n)
    try:
        return _GENERATORS[kind](n)
    except KeyError:
        raise GraphError(f"unknown graph kind {kind!r}") from None


def graph_to_dict(g):
    return {"n": g.n, "edges": [[i, j, w] for i, j, w in g.edges()]}


def graph_from_dict(d):
    """Parse the ``{"n": int, "edges": [[i, j, w], ...]}`` edge-list format.

    Indices are 0-based with ``i < j`` and ``w > 0``. Duplicate pairs,
    self-loops and out-of-range indices are rejected.
    """
    try:
        n = int(d["n"])
        raw = d["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph object: {exc}") from None
    if n < 2:
        raise GraphError(f"need at least 2 agents, got n={n}")
    seen = set()
    edges = []
    for e in raw:
        if len(e) != 3:
            raise GraphError(f"edge {e!r} must be [i, j, w]")
        i, j, w = e
        if int(i) != i or int(j) != j:
            raise GraphError(f"edge {e!r} has non-integer indices")
        i, j, w = int(i), int(j), float(w)
        if i == j:
            raise GraphError(f"self-loop at node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge {e!r} out of range for n={n}")
        if i > j:
            raise GraphError(f"edge {e!r} must satisfy i < j")
        if not w > 0 or not np.isfinite(w):
            raise GraphError(f"edge {e!r} must have a finite positive weight")
        if (i, j) in seen:
            raise GraphError(f"duplicate edge ({i}, {j})")
        seen.add((i, j))
        edges.append((i, j, w))
    return Graph.from_edges(n, edges)


def load_graph(path):
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def save_graph(g, path):
    Path(path).write_text(json.dumps(graph_to_dict(g), indent=2) + "\n")
