# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: alias tables, temporal walk sampling, graph statistics.

Arithmetic mirrors ``_kernels_py`` operation for operation so that both
paths agree bit for bit.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


cdef void _vose(const f64[::1] p, Py_ssize_t n, f64* scaled, i64* small, i64* large,
                f64[::1] prob, i64[::1] alias) noexcept nogil:
    cdef Py_ssize_t i, ns = 0, nl = 0
    cdef i64 s, g
    for i in range(n):
        scaled[i] = p[i] * n
    for i in range(n):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        g = large[nl]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small[ns] = g
            ns += 1
        else:
            large[nl] = g
            nl += 1
    while nl > 0:
        nl -= 1
        g = large[nl]
        prob[g] = 1.0
        alias[g] = g
    while ns > 0:
        ns -= 1
        s = small[ns]
        prob[s] = 1.0
        alias[s] = s


def alias_build(p):
    cdef const f64[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0]
    prob = np.zeros(n, dtype=np.float64)
    alias = np.zeros(n, dtype=np.int64)
    if n == 0:
        return prob, alias
    cdef f64* scaled = <f64*> malloc(n * sizeof(f64))
    cdef i64* small = <i64*> malloc(n * sizeof(i64))
    cdef i64* large = <i64*> malloc(n * sizeof(i64))
    try:
        _vose(pv, n, scaled, small, large, prob, alias)
    finally:
        free(scaled)
        free(small)
        free(large)
    return prob, alias


cdef inline Py_ssize_t _draw(const f64[::1] prob, const i64[::1] alias, Py_ssize_t off,
                             Py_ssize_t n, f64 u) noexcept nogil:
    cdef f64 x = u * n
    cdef Py_ssize_t i = <Py_ssize_t> x
    if i >= n:
        i = n - 1
    if x - i < prob[off + i]:
        return i
    return alias[off + i]


def alias_draw(prob, alias, double u):
    cdef const f64[::1] pv = np.ascontiguousarray(prob, dtype=np.float64)
    cdef const i64[::1] av = np.ascontiguousarray(alias, dtype=np.int64)
    return int(_draw(pv, av, 0, pv.shape[0], u))


def alias_draw_many(prob, alias, uniforms):
    cdef const f64[::1] pv = np.ascontiguousarray(prob, dtype=np.float64)
    cdef const i64[::1] av = np.ascontiguousarray(alias, dtype=np.int64)
    cdef const f64[::1] uv = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t k, m = uv.shape[0], n = pv.shape[0]
    out = np.empty(m, dtype=np.int64)
    cdef i64[::1] ov = out
    with nogil:
        for k in range(m):
            ov[k] = _draw(pv, av, 0, n, uv[k])
    return out


cdef Py_ssize_t _bisect_right(const f64[::1] a, f64 x, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if x < a[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def sample_walks(indptr, adj_nbr, adj_t, start_nodes, start_times, Py_ssize_t length,
                 Py_ssize_t window, uniforms, i64 end_node, cache):
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] nbr = np.ascontiguousarray(adj_nbr, dtype=np.int64)
    cdef const f64[::1] at = np.ascontiguousarray(adj_t, dtype=np.float64)
    cdef const i64[::1] sn = np.ascontiguousarray(start_nodes, dtype=np.int64)
    cdef const f64[::1] st = np.ascontiguousarray(start_times, dtype=np.float64)
    cdef const f64[:, ::1] uni = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef i64[::1] offset = cache.offset
    cdef f64[::1] cprob = cache.prob
    cdef i64[::1] calias = cache.alias
    cdef i64[::1] used = cache.used
    cdef i64[::1] flushes = cache.flushes
    cdef Py_ssize_t cap = cprob.shape[0]
    cdef Py_ssize_t n_walks = sn.shape[0]
    cdef Py_ssize_t maxdeg = 1
    cdef Py_ssize_t i
    for i in range(ip.shape[0] - 1):
        if ip[i + 1] - ip[i] > maxdeg:
            maxdeg = ip[i + 1] - ip[i]

    nodes_a = np.full((n_walks, length), -1, dtype=np.int64)
    times_a = np.zeros((n_walks, length), dtype=np.float64)
    lengths_a = np.zeros(n_walks, dtype=np.int64)
    cdef i64[:, ::1] nodes = nodes_a
    cdef f64[:, ::1] times = times_a
    cdef i64[::1] lengths = lengths_a

    cdef f64* scaled = <f64*> malloc(maxdeg * sizeof(f64))
    cdef f64* wbuf = <f64*> malloc(maxdeg * sizeof(f64))
    cdef i64* small = <i64*> malloc(maxdeg * sizeof(i64))
    cdef i64* large = <i64*> malloc(maxdeg * sizeof(i64))
    cdef Py_ssize_t w, k, a, b, p, stop, size, off, j, q, ns, nl
    cdef i64 v, s, g
    cdef f64 t, t0, total
    try:
        with nogil:
            for w in range(n_walks):
                v = sn[w]
                t = st[w]
                nodes[w, 0] = v
                times[w, 0] = t
                k = 1
                while k < length:
                    a = ip[v]
                    b = ip[v + 1]
                    p = _bisect_right(at, t, a, b)
                    if p == b:
                        nodes[w, k] = end_node
                        times[w, k] = t
                        k += 1
                        break
                    if window <= 0:
                        stop = b
                    else:
                        stop = p + window if p + window < b else b
                    size = stop - p
                    off = offset[p]
                    if off < 0:
                        if used[0] + size > cap:
                            offset[:] = -1
                            used[0] = 0
                            flushes[0] += 1
                        t0 = at[p]
                        total = 0.0
                        for q in range(size):
                            wbuf[q] = exp(-(at[p + q] - t0))
                            total += wbuf[q]
                        for q in range(size):
                            wbuf[q] = wbuf[q] / total
                        off = used[0]
                        # Vose, same as _vose but writing into the shared pool
                        ns = 0
                        nl = 0
                        for q in range(size):
                            scaled[q] = wbuf[q] * size
                        for q in range(size):
                            if scaled[q] < 1.0:
                                small[ns] = q
                                ns += 1
                            else:
                                large[nl] = q
                                nl += 1
                        while ns > 0 and nl > 0:
                            ns -= 1
                            s = small[ns]
                            nl -= 1
                            g = large[nl]
                            cprob[off + s] = scaled[s]
                            calias[off + s] = g
                            scaled[g] = (scaled[g] + scaled[s]) - 1.0
                            if scaled[g] < 1.0:
                                small[ns] = g
                                ns += 1
                            else:
                                large[nl] = g
                                nl += 1
                        while nl > 0:
                            nl -= 1
                            g = large[nl]
                            cprob[off + g] = 1.0
                            calias[off + g] = g
                        while ns > 0:
                            ns -= 1
                            s = small[ns]
                            cprob[off + s] = 1.0
                            calias[off + s] = s
                        offset[p] = off
                        used[0] = off + size
                    j = p + _draw(cprob, calias, off, size, uni[w, k])
                    v = nbr[j]
                    t = at[j]
                    nodes[w, k] = v
                    times[w, k] = t
                    k += 1
                for q in range(k, length):
                    times[w, q] = times[w, k - 1]
                lengths[w] = k
    finally:
        free(scaled)
        free(wbuf)
        free(small)
        free(large)
    return nodes_a, times_a, lengths_a


cdef i64 _find(i64* parent, i64 x) noexcept nogil:
    cdef i64 root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def graph_kernels(indptr, indices):
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    bc_a = np.zeros(n, dtype=np.float64)
    close_a = np.zeros(n, dtype=np.float64)
    if n <= 0:
        return 0, 0, 0, bc_a, close_a
    cdef f64[::1] bc = bc_a
    cdef f64[::1] close = close_a
    dist_a = np.empty(n, dtype=np.int64)
    order_a = np.empty(n, dtype=np.int64)
    parent_a = np.arange(n, dtype=np.int64)
    sizes_a = np.zeros(n, dtype=np.int64)
    sigma_a = np.empty(n, dtype=np.float64)
    delta_a = np.empty(n, dtype=np.float64)
    cdef i64[::1] dist = dist_a
    cdef i64[::1] order = order_a
    cdef i64[::1] parent = parent_a
    cdef i64[::1] sizes = sizes_a
    cdef f64[::1] sigma = sigma_a
    cdef f64[::1] delta = delta_a
    cdef i64 tri = 0, n_comp = 0, lcc = 0, dsum
    cdef Py_ssize_t u, v, w, i, j, e, s, head, tail, q
    cdef i64 a, b, ru, rv
    with nogil:
        for u in range(n):
            for e in range(ip[u], ip[u + 1]):
                v = idx[e]
                if v <= u:
                    continue
                i = ip[u]
                j = ip[v]
                while i < ip[u + 1] and j < ip[v + 1]:
                    a = idx[i]
                    b = idx[j]
                    if a < b:
                        i += 1
                    elif a > b:
                        j += 1
                    else:
                        if a > v:
                            tri += 1
                        i += 1
                        j += 1
        for u in range(n):
            for e in range(ip[u], ip[u + 1]):
                ru = _find(&parent[0], u)
                rv = _find(&parent[0], idx[e])
                if ru != rv:
                    if ru < rv:
                        parent[rv] = ru
                    else:
                        parent[ru] = rv
        for u in range(n):
            sizes[_find(&parent[0], u)] += 1
        for u in range(n):
            if sizes[u] > 0:
                n_comp += 1
                if sizes[u] > lcc:
                    lcc = sizes[u]

        for s in range(n):
            for u in range(n):
                dist[u] = -1
                sigma[u] = 0.0
                delta[u] = 0.0
            dist[s] = 0
            sigma[s] = 1.0
            order[0] = s
            head = 0
            tail = 1
            dsum = 0
            while head < tail:
                v = order[head]
                head += 1
                for e in range(ip[v], ip[v + 1]):
                    w = idx[e]
                    if dist[w] < 0:
                        dist[w] = dist[v] + 1
                        dsum += dist[w]
                        order[tail] = w
                        tail += 1
                    if dist[w] == dist[v] + 1:
                        sigma[w] += sigma[v]
            if tail > 1:
                close[s] = (tail - 1) / <f64> dsum
            for q in range(tail - 1, -1, -1):
                v = order[q]
                for e in range(ip[v], ip[v + 1]):
                    w = idx[e]
                    if dist[w] == dist[v] + 1:
                        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
                if v != s:
                    bc[v] += delta[v]
    return int(tri), int(n_comp), int(lcc), bc_a * 0.5, close_a
