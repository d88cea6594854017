import numpy as np
import pytest
from hypothesis import settings

from gspconsensus import graph as gr

# same examples on every run
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


def random_connected_graph(rng, n_min=2, n_max=12, weighted=True):
    """Connected Erdos-Renyi graph, optionally with random positive weights."""
    n = int(rng.integers(n_min, n_max + 1))
    p = float(rng.uniform(0.3, 0.9))
    g = gr.erdos_renyi(n, p, int(rng.integers(1 << 30)))
    if not weighted:
        return g
    w = np.triu(g.weights, 1) * rng.uniform(0.2, 2.0, (n, n))
    return gr.Graph(n, w + w.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def c6():
    return gr.cycle(6)


@pytest.fixture
def p6():
    return gr.path(6)


@pytest.fixture
def k2():
    return gr.complete(2)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::" in rep.nodeid:
                lines.append((rep.nodeid.split("::")[-1], outcome))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(lines):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
