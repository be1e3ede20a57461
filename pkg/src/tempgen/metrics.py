"""Snapshot statistics and source-vs-generated error reports.

Statistics are computed over a snapshot's incident nodes (nodes with at
least one edge in that snapshot).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import kernels
from .assembly import bin_to_timestamps
from .graph import StaticGraph, TemporalGraph, iter_snapshots

STAT_NAMES = ("mean_degree", "wedge_count", "triangle_count", "ple", "red_entropy", "lcc_size",
              "num_components", "global_cf", "mean_betweenness", "mean_closeness")


@dataclass
class SnapshotStats:
    mean_degree: float = 0.0
    wedge_count: int = 0
    triangle_count: int = 0
    ple: float = 0.0
    red_entropy: float = 0.0
    lcc_size: int = 0
    num_components: int = 0
    global_cf: float = 0.0
    mean_betweenness: float = 0.0
    mean_closeness: float = 0.0
    empty: bool = False

    def values(self) -> np.ndarray:
        return np.array([float(getattr(self, k)) for k in STAT_NAMES])


def compact_csr(gs: StaticGraph):
    """CSR over the incident nodes of ``gs`` (relabelled 0..n-1, sorted neighbors)."""
    nodes = gs.nodes()
    e = gs.edge_array()
    if len(e) == 0:
        return nodes, np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    idx = np.searchsorted(nodes, e)
    src = np.r_[idx[:, 0], idx[:, 1]]
    dst = np.r_[idx[:, 1], idx[:, 0]]
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(len(nodes) + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=len(nodes)), out=indptr[1:])
    return nodes, indptr, dst.astype(np.int64)


def stats(gs: StaticGraph, backend: str | None = None) -> SnapshotStats:
    if len(gs.edges) == 0:
        return SnapshotStats(empty=True)
    nodes, indptr, indices = compact_csr(gs)
    n = len(nodes)
    m = len(gs.edges)
    deg = np.diff(indptr).astype(np.float64)
    tri, nc, lcc, bc, close = kernels.get_backend(backend).graph_kernels(indptr, indices)
    wedges = int((deg * (deg - 1) / 2).sum())
    p = deg / (2.0 * m)
    red = float(-(p * np.log(p)).sum() / math.log(n)) if n > 1 else 0.0
    ple = 1.0 + n / float(np.log(deg / 0.5).sum())
    norm = (n - 1) * (n - 2) / 2.0
    reach = close > 0
    return SnapshotStats(
        mean_degree=2.0 * m / n,
        wedge_count=wedges,
        triangle_count=int(tri),
        ple=ple,
        red_entropy=red,
        lcc_size=int(lcc),
        num_components=int(nc),
        global_cf=3.0 * tri / wedges if wedges else 0.0,
        mean_betweenness=float((bc / norm).mean()) if n > 2 else 0.0,
        mean_closeness=float(close[reach].mean()) if reach.any() else 0.0,
    )


def _snapshots_from_arrays(num_nodes, u, v, t, timestamps, mode):
    """StaticGraph per requested timestamp (empty if absent) from edge arrays."""
    order = np.argsort(t, kind="stable")
    u, v, t = u[order], v[order], t[order]
    lo = np.minimum(u, v).tolist()
    hi = np.maximum(u, v).tolist()
    out = {}
    acc = set()
    j = 0
    n = len(t)
    tl = t.tolist()
    for ts in timestamps:
        cur = set()
        if mode == "upto":
            while j < n and tl[j] <= ts:
                acc.add((lo[j], hi[j]))
                j += 1
            cur = acc
        else:
            while j < n and tl[j] < ts:
                j += 1
            while j < n and tl[j] == ts:
                cur.add((lo[j], hi[j]))
                j += 1
        out[ts] = StaticGraph(num_nodes, frozenset(cur))
    return out


@dataclass
class ErrorReport:
    median: dict
    mean: dict
    std: dict
    overlap: float
    n_snapshots: int
    gen_time: float | None = None
    snapshots: list = field(default_factory=list)  # (t, src SnapshotStats, gen SnapshotStats)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["statistic", "median_abs_err", "mean_abs_err", "std"])
            for k in STAT_NAMES:
                w.writerow([k, repr(self.median[k]), repr(self.mean[k]), repr(self.std[k])])

    def summary(self) -> dict:
        out = {"median_abs_err": self.median, "mean_abs_err": self.mean, "std": self.std,
               "edge_overlap_pct": self.overlap, "n_snapshots": self.n_snapshots}
        if self.gen_time is not None:
            out["generation_seconds"] = self.gen_time
        return out

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_snapshots(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "graph"] + list(STAT_NAMES))
            for t, s, g in self.snapshots:
                w.writerow([repr(t), "source"] + [repr(x) for x in s.values().tolist()])
                w.writerow([repr(t), "generated"] + [repr(x) for x in g.values().tolist()])


def time_unit(g: TemporalGraph) -> float:
    ts = np.unique(g.t)
    return float(np.diff(ts).min()) if len(ts) > 1 else 1.0


def edge_overlap(src: TemporalGraph, gen: TemporalGraph, binned: bool = True,
                 tol: float | None = None) -> float:
    """``|E & E'| / |E| * 100``; without binning times match within ``tol``."""
    if src.num_edges == 0:
        return 0.0
    if binned:
        return 100.0 * len(src.edge_keys() & gen.edge_keys()) / src.num_edges
    tol = 0.5 * time_unit(src) if tol is None else tol
    by_pair: dict = {}
    for a, b, t in gen.edge_keys():
        by_pair.setdefault((a, b), []).append(t)
    for v in by_pair.values():
        v.sort()
    hits = 0
    for a, b, t in src.edge_keys():
        cand = by_pair.get((a, b))
        if cand:
            i = int(np.searchsorted(cand, t))
            near = [cand[j] for j in (i - 1, i) if 0 <= j < len(cand)]
            hits += any(abs(c - t) < tol for c in near)
    return 100.0 * hits / src.num_edges


def error_report(src: TemporalGraph, gen: TemporalGraph, mode: str = "at", shared_node_ids: bool = True,
                 bin_times: bool = True, gen_time: float | None = None,
                 backend: str | None = None) -> ErrorReport:
    """Per-statistic absolute errors over snapshots aligned on the source timestamps."""
    if src.num_edges == 0:
        raise ValueError("source graph has no edges")
    ts = np.unique(src.t).tolist()
    gt = bin_to_timestamps(gen.t, ts) if bin_times and gen.num_edges else np.asarray(gen.t)
    gen_snaps = _snapshots_from_arrays(gen.num_nodes, gen.src, gen.dst, np.asarray(gt), ts, mode)
    rows = []
    errs = []
    for t, s_snap in iter_snapshots(src, mode):
        s = stats(s_snap, backend)
        g = stats(gen_snaps[t], backend)
        rows.append((t, s, g))
        errs.append(np.abs(s.values() - g.values()))
    E = np.array(errs)
    if not shared_node_ids:
        overlap = 0.0
    elif bin_times:
        keys = set(zip(np.minimum(gen.src, gen.dst).tolist(), np.maximum(gen.src, gen.dst).tolist(),
                       np.asarray(gt, dtype=np.float64).tolist()))
        overlap = 100.0 * len(src.edge_keys() & keys) / src.num_edges
    else:
        overlap = edge_overlap(src, gen, binned=False)
    return ErrorReport(
        median=dict(zip(STAT_NAMES, np.median(E, axis=0).tolist())),
        mean=dict(zip(STAT_NAMES, E.mean(axis=0).tolist())),
        std=dict(zip(STAT_NAMES, E.std(axis=0).tolist())),
        overlap=float(overlap), n_snapshots=len(rows), gen_time=gen_time, snapshots=rows)


def null_generator(src: TemporalGraph, num_edges: int | None = None, seed: int = 0,
                   num_nodes: int | None = None) -> TemporalGraph:
    """Baseline: distinct uniform random pairs at uniformly chosen source timestamps."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 9]))
    n = num_nodes or src.num_nodes
    M = num_edges or src.num_edges
    ts = np.unique(src.t)
    seen = set()
    out = []
    while len(out) < M:
        k = 2 * (M - len(out))
        a = rng.integers(0, n, k)
        b = rng.integers(0, n, k)
        t = ts[rng.integers(0, len(ts), k)]
        for x, y, z in zip(a.tolist(), b.tolist(), t.tolist()):
            if x == y:
                continue
            key = (min(x, y), max(x, y), z)
            if key in seen:
                continue
            seen.add(key)
            out.append(key)
            if len(out) == M:
                break
    arr = np.array(out)
    return TemporalGraph(n, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2])


def stats_dict(s: SnapshotStats) -> dict:
    return {f.name: getattr(s, f.name) for f in fields(s)}
