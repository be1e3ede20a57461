"""Temporal graph data model, edge-list I/O, static projection and snapshots.

Graphs are undirected. Node labels from the input file are remapped to
dense 0-based indices; the label list is kept on the graph so that outputs
can be written back with the original labels.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Raised for malformed or empty edge-list input."""


@dataclass(frozen=True)
class TemporalEdge:
    u: int
    v: int
    t: float

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"self-loop on node {self.u}")
        if not self.t >= 0:
            raise ValueError(f"negative or NaN timestamp {self.t}")


@dataclass(frozen=True)
class StaticGraph:
    """Undirected simple graph; ``edges`` holds pairs with ``u < v``."""

    num_nodes: int
    edges: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_pairs(cls, num_nodes: int, pairs: Iterable[tuple[int, int]]) -> "StaticGraph":
        out = set()
        for u, v in pairs:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            out.add((u, v) if u < v else (v, u))
        return cls(num_nodes, frozenset(out))

    def nodes(self) -> np.ndarray:
        """Sorted array of nodes with at least one incident edge."""
        if not self.edges:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.fromiter((x for e in self.edges for x in e), dtype=np.int64))

    def edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.edges)


class TemporalGraph:
    """Immutable temporal interaction graph.

    Edges are stored as parallel arrays ``src``, ``dst``, ``t`` sorted by
    time (stable with respect to input order). A CSR adjacency gives, for
    every node, its incident ``(neighbor, time)`` pairs ascending in time.
    """

    def __init__(self, num_nodes: int, src, dst, t, labels: Sequence[str] | None = None):
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        t = np.asarray(t, dtype=np.float64).ravel()
        if not (len(src) == len(dst) == len(t)):
            raise ValueError("src, dst and t must have equal length")
        if len(src):
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= num_nodes:
                raise ValueError("edge endpoint out of range")
            if np.any(src == dst):
                raise ValueError("self-loops are not allowed")
            if np.any(~(t >= 0)):
                raise ValueError("timestamps must be finite and >= 0")
            if not np.all(np.isfinite(t)):
                raise ValueError("timestamps must be finite")
        order = np.argsort(t, kind="stable")
        self.num_nodes = int(num_nodes)
        self.src = src[order]
        self.dst = dst[order]
        self.t = t[order]
        lo = np.minimum(self.src, self.dst)
        hi = np.maximum(self.src, self.dst)
        if len(src):
            keys = np.stack([lo, hi], axis=1)
            uniq = np.unique(np.column_stack([keys.astype(np.float64), self.t]), axis=0)
            if len(uniq) != len(src):
                raise ValueError("duplicate (u, v, t) interaction")
        self.labels = list(labels) if labels is not None else [str(i) for i in range(num_nodes)]
        if len(self.labels) != num_nodes:
            raise ValueError("label count does not match num_nodes")
        for arr in (self.src, self.dst, self.t):
            arr.setflags(write=False)
        self._build_adjacency()

    def _build_adjacency(self):
        m = len(self.src)
        ends = np.concatenate([self.src, self.dst])
        nbrs = np.concatenate([self.dst, self.src])
        times = np.concatenate([self.t, self.t])
        eids = np.concatenate([np.arange(m), np.arange(m)])
        # lexsort: primary node, then time, then edge id for a stable tie order
        order = np.lexsort((eids, times, ends))
        self.adj_nbr = nbrs[order].astype(np.int64)
        self.adj_t = times[order].astype(np.float64)
        self.adj_eid = eids[order].astype(np.int64)
        counts = np.bincount(ends, minlength=self.num_nodes) if m else np.zeros(self.num_nodes, np.int64)
        self.indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=self.indptr[1:])
        for arr in (self.adj_nbr, self.adj_t, self.adj_eid, self.indptr):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, edges: Iterable, num_nodes: int | None = None,
                   labels: Sequence[str] | None = None, dedupe: bool = False) -> "TemporalGraph":
        rows = [(int(e[0]), int(e[1]), float(e[2])) for e in edges]
        if dedupe:
            rows = _dedupe_rows(rows)
        if num_nodes is None:
            num_nodes = 1 + max((max(u, v) for u, v, _ in rows), default=-1)
        if not rows:
            return cls(num_nodes, [], [], [], labels)
        src, dst, t = zip(*rows)
        return cls(num_nodes, src, dst, t, labels)

    @property
    def num_edges(self) -> int:
        return len(self.src)

    @property
    def t_max(self) -> float:
        return float(self.t[-1]) if len(self.t) else 0.0

    @property
    def edges(self) -> list[TemporalEdge]:
        return [TemporalEdge(int(u), int(v), float(t)) for u, v, t in zip(self.src, self.dst, self.t)]

    def adjacency(self, v: int) -> list[tuple[int, float]]:
        a, b = self.indptr[v], self.indptr[v + 1]
        return list(zip(self.adj_nbr[a:b].tolist(), self.adj_t[a:b].tolist()))

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_keys(self) -> set[tuple[int, int, float]]:
        """Set of ``(min(u,v), max(u,v), t)`` triples."""
        lo = np.minimum(self.src, self.dst).tolist()
        hi = np.maximum(self.src, self.dst).tolist()
        return set(zip(lo, hi, self.t.tolist()))

    def __len__(self) -> int:
        return self.num_edges

    def __repr__(self) -> str:
        return f"TemporalGraph(N={self.num_nodes}, M={self.num_edges}, T={self.t_max:g})"


def _dedupe_rows(rows):
    seen = set()
    out = []
    for u, v, t in rows:
        key = (min(u, v), max(u, v), t)
        if key in seen:
            continue
        seen.add(key)
        out.append((u, v, t))
    return out


def load_edge_list(path, dedupe: bool = True) -> TemporalGraph:
    """Read a ``source,target,timestamp`` edge list.

    Lines starting with ``#`` and blank lines are ignored. Self-loop lines
    are skipped and counted (``graph.skipped_self_loops``). With
    ``dedupe=False`` a repeated interaction raises :class:`EdgeListError`.
    """
    path = Path(path)
    index: dict[str, int] = {}
    labels: list[str] = []
    rows = []
    seen = set()
    self_loops = 0
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3 or not parts[0] or not parts[1]:
                raise EdgeListError(f"{path}:{lineno}: expected 'source,target,timestamp', got {line!r}")
            a, b, ts = parts
            try:
                t = float(ts)
            except ValueError:
                raise EdgeListError(f"{path}:{lineno}: bad timestamp {ts!r}") from None
            if not math.isfinite(t) or t < 0:
                raise EdgeListError(f"{path}:{lineno}: timestamp must be finite and >= 0, got {ts!r}")
            if a == b:
                self_loops += 1
                continue
            for lab in (a, b):
                if lab not in index:
                    index[lab] = len(labels)
                    labels.append(lab)
            u, v = index[a], index[b]
            key = (min(u, v), max(u, v), t)
            if key in seen:
                if not dedupe:
                    raise EdgeListError(f"{path}:{lineno}: duplicate interaction {a},{b},{ts}")
                duplicates += 1
                continue
            seen.add(key)
            rows.append((u, v, t))
    if not rows:
        raise EdgeListError(f"{path}: no edges")
    if self_loops:
        log.warning("%s: skipped %d self-loop line(s)", path, self_loops)
    if duplicates:
        log.info("%s: dropped %d duplicate interaction(s)", path, duplicates)
    src, dst, t = zip(*rows)
    g = TemporalGraph(len(labels), src, dst, t, labels)
    g.skipped_self_loops = self_loops
    g.dropped_duplicates = duplicates
    return g


def format_time(t: float) -> str:
    """Integers print without a decimal point; other values round-trip exactly."""
    t = float(t)
    if t.is_integer() and abs(t) < 2 ** 53:
        return str(int(t))
    return repr(t)


def save_edge_list(g: TemporalGraph, path, use_labels: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, t in zip(g.src.tolist(), g.dst.tolist(), g.t.tolist()):
            a, b = (g.labels[u], g.labels[v]) if use_labels else (u, v)
            fh.write(f"{a},{b},{format_time(t)}\n")


def save_label_map(g: TemporalGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("label,index\n")
        for i, lab in enumerate(g.labels):
            fh.write(f"{lab},{i}\n")


def static_projection(g: TemporalGraph) -> StaticGraph:
    lo = np.minimum(g.src, g.dst).tolist()
    hi = np.maximum(g.src, g.dst).tolist()
    return StaticGraph(g.num_nodes, frozenset(zip(lo, hi)))


def unique_timestamps(g: TemporalGraph) -> list[float]:
    return np.unique(g.t).tolist()


def snapshot(g: TemporalGraph, t: float, mode: str = "at") -> StaticGraph:
    """Static graph of the edges at timestamp ``t`` (``mode='at'``) or up to it."""
    if mode == "at":
        lo_i = np.searchsorted(g.t, t, side="left")
        hi_i = np.searchsorted(g.t, t, side="right")
        if lo_i == hi_i:
            raise KeyError(f"timestamp absent: {t!r}")
    elif mode == "upto":
        lo_i, hi_i = 0, np.searchsorted(g.t, t, side="right")
    else:
        raise ValueError(f"unknown snapshot mode {mode!r}")
    return StaticGraph.from_pairs(g.num_nodes, zip(g.src[lo_i:hi_i].tolist(), g.dst[lo_i:hi_i].tolist()))


def iter_snapshots(g: TemporalGraph, mode: str = "at"):
    """Yield ``(t, StaticGraph)`` for every unique timestamp, in one pass."""
    if g.num_edges == 0:
        return
    bounds = np.flatnonzero(np.diff(g.t)) + 1
    starts = np.concatenate([[0], bounds])
    stops = np.concatenate([bounds, [g.num_edges]])
    acc: set = set()
    for a, b in zip(starts.tolist(), stops.tolist()):
        lo = np.minimum(g.src[a:b], g.dst[a:b]).tolist()
        hi = np.maximum(g.src[a:b], g.dst[a:b]).tolist()
        if mode == "at":
            yield float(g.t[a]), StaticGraph(g.num_nodes, frozenset(zip(lo, hi)))
        elif mode == "upto":
            acc.update(zip(lo, hi))
            yield float(g.t[a]), StaticGraph(g.num_nodes, frozenset(acc))
        else:
            raise ValueError(f"unknown snapshot mode {mode!r}")
