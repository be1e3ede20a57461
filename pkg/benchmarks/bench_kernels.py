"""Compiled vs pure-Python kernels: walk sampling and snapshot statistics.

    python benchmarks/bench_kernels.py [--walks 20000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from tempgen import kernels
from tempgen.graph import iter_snapshots, static_projection
from tempgen.metrics import compact_csr
from tempgen.synthetic import two_community_graph
from tempgen.walker import Walker


def best_of(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--walks", type=int, default=20000)
    ap.add_argument("--length", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    g = two_community_graph()
    rng = np.random.default_rng(0)
    eids = rng.integers(0, g.num_edges, args.walks)
    u = rng.random((args.walks, args.length))
    csrs = [compact_csr(s) for _, s in iter_snapshots(g, "upto")]
    csrs.append(compact_csr(static_projection(g)))

    backends = ["python"] + (["cython"] if kernels.BACKEND_NAME == "cython" else [])
    rows = {}
    for name in backends:
        k = kernels.get_backend(name)

        def walks():
            # fresh walker per run so alias tables are rebuilt each time
            Walker(g, backend=name).sample(g.src[eids], g.t[eids], args.length, u)

        def stats():
            for _, indptr, indices in csrs:
                k.graph_kernels(indptr, indices)

        rows[name] = (best_of(walks, args.repeat), best_of(stats, args.repeat))

    print(f"graph: {g!r}; {args.walks} walks of length {args.length}; {len(csrs)} snapshot graphs")
    print(f"{'backend':<8} {'walks (s)':>10} {'stats (s)':>10}")
    for name, (w, s) in rows.items():
        print(f"{name:<8} {w:10.3f} {s:10.3f}")
    if len(rows) == 2:
        (pw, ps), (cw, cs) = rows["python"], rows["cython"]
        print(f"speedup  {pw / cw:9.1f}x {ps / cs:9.1f}x")
    else:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
