"""Small synthetic temporal graph used by the smoke tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .graph import TemporalGraph


def two_community_graph(seed: int = 0, n: int = 60, m: int = 3000, T: int = 100,
                        period: float = 50.0, within: float = 0.9) -> TemporalGraph:
    """Two-community interaction graph with log-normal inter-event gaps.

    Nodes alternate between communities; a fraction ``within`` of the
    interactions stays inside the initiator's community. Global gaps are
    log-normal with a rate modulated sinusoidally over ``period`` so the
    per-timestamp edge count varies. Times are rounded up to integers in
    ``1..T``; the clock restarts at 0 until ``m`` distinct edges exist.
    """
    rng = np.random.default_rng(seed)
    comm = np.arange(n) % 2
    t = 0.0
    rows = []
    seen = set()
    while len(rows) < m:
        rate = 1.0 + 0.8 * np.sin(2 * np.pi * t / period)
        t += rng.lognormal(np.log(0.033 / rate), 0.5)
        ti = float(int(t) + 1)
        if ti > T:
            t = 0.0
            continue
        u = int(rng.integers(n))
        same = rng.random() < within
        cand = np.nonzero((comm == comm[u]) == same)[0]
        v = int(rng.choice(cand))
        if u == v:
            continue
        k = (min(u, v), max(u, v), ti)
        if k in seen:
            continue
        seen.add(k)
        rows.append((u, v, ti))
    return TemporalGraph.from_edges(rows, num_nodes=n)
