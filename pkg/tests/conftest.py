import sys

import numpy as np
import pytest

from tempgen.graph import TemporalGraph


@pytest.fixture
def small_graph():
    rows = [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0), (2, 3, 3.0), (1, 3, 4.0), (0, 3, 5.0), (3, 4, 6.0)]
    return TemporalGraph.from_edges(rows, num_nodes=5)


def random_temporal_graph(rng, n=12, m=60, T=10):
    seen = set()
    rows = []
    while len(rows) < m:
        u, v = (int(x) for x in rng.integers(0, n, 2))
        t = float(rng.integers(1, T + 1))
        k = (min(u, v), max(u, v), t)
        if u == v or k in seen:
            continue
        seen.add(k)
        rows.append((u, v, t))
    return TemporalGraph.from_edges(rows, num_nodes=n)


@pytest.fixture
def rand_graph():
    return random_temporal_graph(np.random.default_rng(7))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
