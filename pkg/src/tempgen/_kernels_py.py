"""Pure-Python reference implementations of the hot kernels.

``_kernels.pyx`` mirrors every function here with identical arithmetic, so
the compiled and fallback paths produce the same outputs for the same
inputs (walks are driven by pre-drawn uniforms, not by an RNG object).
"""
import bisect
import math

import numpy as np


def alias_build(p):
    """Vose alias construction. ``p`` must be a normalized float64 vector."""
    n = len(p)
    prob = np.zeros(n, dtype=np.float64)
    alias = np.zeros(n, dtype=np.int64)
    scaled = [float(x) * n for x in p]
    small = []
    large = []
    for i in range(n):
        if scaled[i] < 1.0:
            small.append(i)
        else:
            large.append(i)
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    while large:
        g = large.pop()
        prob[g] = 1.0
        alias[g] = g
    while small:
        s = small.pop()
        prob[s] = 1.0
        alias[s] = s
    return prob, alias


def alias_draw(prob, alias, u):
    """One draw from a single uniform ``u`` in [0, 1)."""
    n = len(prob)
    x = u * n
    i = int(x)
    if i >= n:
        i = n - 1
    if x - i < prob[i]:
        return i
    return int(alias[i])


def alias_draw_many(prob, alias, uniforms):
    out = np.empty(len(uniforms), dtype=np.int64)
    for k in range(len(uniforms)):
        out[k] = alias_draw(prob, alias, uniforms[k])
    return out


def _table_for(cache, adj_t, p, stop):
    off = cache.offset[p]
    if off >= 0:
        return off
    size = stop - p
    if cache.used[0] + size > len(cache.prob):
        cache.offset[:] = -1
        cache.used[0] = 0
        cache.flushes[0] += 1
    t0 = adj_t[p]
    w = [math.exp(-(adj_t[j] - t0)) for j in range(p, stop)]
    total = 0.0
    for x in w:
        total += x
    prob, alias = alias_build([x / total for x in w])
    off = cache.used[0]
    cache.prob[off:off + size] = prob
    cache.alias[off:off + size] = alias
    cache.offset[p] = off
    cache.used[0] = off + size
    return off


def sample_walks(indptr, adj_nbr, adj_t, start_nodes, start_times, length, window,
                 uniforms, end_node, cache):
    """Temporal random walks with exponential time-gap jump weights.

    Returns ``(nodes, times, lengths)``; rows are padded with -1 / the last
    time. An early stop appends ``end_node`` (time = last real time).
    """
    indptr = [int(x) for x in indptr]
    adj_nbr = [int(x) for x in adj_nbr]
    adj_t = [float(x) for x in adj_t]
    n_walks = len(start_nodes)
    nodes = np.full((n_walks, length), -1, dtype=np.int64)
    times = np.zeros((n_walks, length), dtype=np.float64)
    lengths = np.zeros(n_walks, dtype=np.int64)
    for w in range(n_walks):
        v = int(start_nodes[w])
        t = float(start_times[w])
        nodes[w, 0] = v
        times[w, 0] = t
        k = 1
        while k < length:
            a = indptr[v]
            b = indptr[v + 1]
            p = bisect.bisect_right(adj_t, t, a, b)
            if p == b:
                nodes[w, k] = end_node
                times[w, k] = t
                k += 1
                break
            stop = b if window <= 0 else min(p + window, b)
            off = _table_for(cache, adj_t, p, stop)
            size = stop - p
            j = p + alias_draw(cache.prob[off:off + size], cache.alias[off:off + size], uniforms[w, k])
            v = adj_nbr[j]
            t = adj_t[j]
            nodes[w, k] = v
            times[w, k] = t
            k += 1
        times[w, k:] = times[w, k - 1]
        lengths[w] = k
    return nodes, times, lengths


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def graph_kernels(indptr, indices):
    """Exact structural quantities of a simple undirected graph in CSR form.

    Neighbor lists must be sorted ascending. Returns ``(triangles,
    n_components, lcc_size, betweenness, closeness)``; betweenness is raw
    (unnormalized, each unordered pair counted once) and closeness is
    ``reachable / sum(distances)`` per node, 0 for isolated nodes.
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    n = len(indptr) - 1
    # triangles: for u < v < w with all three edges present
    tri = 0
    for u in range(n):
        nu = indices[indptr[u]:indptr[u + 1]]
        for v in nu:
            if v <= u:
                continue
            nv = indices[indptr[v]:indptr[v + 1]]
            i = j = 0
            while i < len(nu) and j < len(nv):
                a, b = nu[i], nv[j]
                if a < b:
                    i += 1
                elif a > b:
                    j += 1
                else:
                    if a > v:
                        tri += 1
                    i += 1
                    j += 1
    parent = list(range(n))
    for u in range(n):
        for v in indices[indptr[u]:indptr[u + 1]]:
            ru, rv = _find(parent, u), _find(parent, int(v))
            if ru != rv:
                if ru < rv:
                    parent[rv] = ru
                else:
                    parent[ru] = rv
    sizes = {}
    for u in range(n):
        r = _find(parent, u)
        sizes[r] = sizes.get(r, 0) + 1
    n_comp = len(sizes)
    lcc = max(sizes.values()) if sizes else 0

    bc = [0.0] * n
    close = [0.0] * n
    for s in range(n):
        dist = [-1] * n
        sigma = [0.0] * n
        delta = [0.0] * n
        dist[s] = 0
        sigma[s] = 1.0
        order = [s]
        head = 0
        dsum = 0
        while head < len(order):
            v = order[head]
            head += 1
            for w in indices[indptr[v]:indptr[v + 1]]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    dsum += dist[w]
                    order.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        reach = len(order) - 1
        if reach > 0:
            close[s] = reach / dsum
        for v in reversed(order):
            for w in indices[indptr[v]:indptr[v + 1]]:
                if dist[w] == dist[v] + 1:
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if v != s:
                bc[v] += delta[v]
    return tri, n_comp, lcc, np.array(bc) * 0.5, np.array(close)
