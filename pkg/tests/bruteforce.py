"""Exhaustive reference implementations of the snapshot statistics."""
import itertools
import math

import numpy as np

from tempgen.metrics import STAT_NAMES


def reference_stats(edges):
    """All ten statistics by enumeration, over the incident nodes of ``edges``."""
    nodes = sorted({x for e in edges for x in e})
    n, m = len(nodes), len(edges)
    adj = {v: set() for v in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    deg = {v: len(adj[v]) for v in nodes}
    wedges = sum(1 for c in nodes for a, b in itertools.combinations(sorted(adj[c]), 2))
    tri = sum(1 for a, b, c in itertools.combinations(nodes, 3) if b in adj[a] and c in adj[a] and c in adj[b])
    # all-pairs shortest paths and path counts (Floyd-Warshall style, on hop counts)
    INF = math.inf
    d = {(s, t): (0 if s == t else (1 if t in adj[s] else INF)) for s in nodes for t in nodes}
    for k in nodes:
        for s in nodes:
            for t in nodes:
                if d[s, k] + d[k, t] < d[s, t]:
                    d[s, t] = d[s, k] + d[k, t]
    sigma = {}
    for s in nodes:
        for t in nodes:
            sigma[s, t] = _count_paths(adj, d, s, t)
    bc = {v: 0.0 for v in nodes}
    for s, t in itertools.combinations(nodes, 2):
        if d[s, t] == INF:
            continue
        for v in nodes:
            if v in (s, t):
                continue
            if d[s, v] + d[v, t] == d[s, t]:
                bc[v] += sigma[s, v] * sigma[v, t] / sigma[s, t]
    comps = []
    seen = set()
    for v in nodes:
        if v not in seen:
            comp = {t for t in nodes if d[v, t] < INF}
            seen |= comp
            comps.append(comp)
    close = []
    for v in nodes:
        reach = [d[v, t] for t in nodes if t != v and d[v, t] < INF]
        close.append(len(reach) / sum(reach))
    p = np.array([deg[v] / (2 * m) for v in nodes])
    norm = (n - 1) * (n - 2) / 2
    out = {
        "mean_degree": 2 * m / n,
        "wedge_count": wedges,
        "triangle_count": tri,
        "ple": 1 + n / sum(math.log(deg[v] / 0.5) for v in nodes),
        "red_entropy": float(-(p * np.log(p)).sum() / math.log(n)) if n > 1 else 0.0,
        "lcc_size": max(len(c) for c in comps),
        "num_components": len(comps),
        "global_cf": 3 * tri / wedges if wedges else 0.0,
        "mean_betweenness": float(np.mean([bc[v] / norm for v in nodes])) if n > 2 else 0.0,
        "mean_closeness": float(np.mean(close)),
    }
    return np.array([float(out[k]) for k in STAT_NAMES])


def _count_paths(adj, d, s, t):
    if s == t:
        return 1
    if d[s, t] == math.inf:
        return 0
    return sum(_count_paths(adj, d, s, u) for u in adj[t] if d[s, u] == d[s, t] - 1)


def random_static_edges(rng, max_nodes=8):
    n = int(rng.integers(2, max_nodes + 1))
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < rng.uniform(0.15, 0.9)
    edges = [pr for pr, k in zip(pairs, keep) if k]
    return edges or [pairs[0]]
