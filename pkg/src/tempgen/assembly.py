"""Turn synthetic walk triples into a generated temporal graph.

Triples ``(u, v, t)`` are counted (``alpha``, unordered pairs). The target
edge count is split over timestamps in proportion to their alpha mass
(largest-remainder rounding), and each timestamp draws pairs without
replacement with probability proportional to their counts. Quota a
timestamp cannot fill spills over to the most frequent unused triples.
"""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graph import TemporalGraph, format_time


@dataclass
class AlphaCounts:
    counts: Counter = field(default_factory=Counter)  # (u, v, t) with u < v -> count
    dropped_self_loops: int = 0
    dropped_late: int = 0

    def __len__(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return sum(self.counts.values())

    def timestamps(self) -> list[float]:
        return sorted({k[2] for k in self.counts})

    def merge(self, other: "AlphaCounts") -> "AlphaCounts":
        return AlphaCounts(self.counts + other.counts, self.dropped_self_loops + other.dropped_self_loops,
                           self.dropped_late + other.dropped_late)


def bin_to_timestamps(t, reference) -> np.ndarray:
    """Snap each time to the nearest reference timestamp (ties go to the earlier one)."""
    ref = np.unique(np.asarray(reference, dtype=np.float64))
    t = np.asarray(t, dtype=np.float64)
    if len(ref) == 0:
        raise ValueError("no reference timestamps")
    if len(ref) == 1:
        return np.full(t.shape, ref[0])
    i = np.clip(np.searchsorted(ref, t, side="left"), 1, len(ref) - 1)
    lo, hi = ref[i - 1], ref[i]
    return np.where(t - lo <= hi - t, lo, hi)


def count_alpha(u, v, t, t_max: float | None = None, truncate: bool = True) -> AlphaCounts:
    """Count synthetic triples; with ``truncate`` those later than ``t_max`` are dropped."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    t = np.asarray(t, dtype=np.float64)
    out = AlphaCounts()
    keep = u != v
    out.dropped_self_loops = int((~keep).sum())
    if truncate and t_max is not None:
        late = keep & (t > t_max)
        out.dropped_late = int(late.sum())
        keep &= ~late
    lo = np.minimum(u, v)[keep].tolist()
    hi = np.maximum(u, v)[keep].tolist()
    out.counts.update(zip(lo, hi, t[keep].tolist()))
    return out


def count_alpha_walks(walks, t_max=None, truncate=True) -> AlphaCounts:
    trip = [e for w in walks for e in w.edges()]
    if not trip:
        return AlphaCounts()
    a = np.array(trip, dtype=np.float64)
    return count_alpha(a[:, 0].astype(np.int64), a[:, 1].astype(np.int64), a[:, 2], t_max, truncate)


def edge_distribution(alpha: AlphaCounts, t: float):
    """``(pairs, probabilities)`` over node pairs observed at time ``t``."""
    items = sorted((k[0], k[1], c) for k, c in alpha.counts.items() if k[2] == t)
    if not items:
        raise KeyError(f"no pairs at time {t!r}")
    c = np.array([x[2] for x in items], dtype=np.float64)
    return [(a, b) for a, b, _ in items], c / c.sum()


def largest_remainder(mass, total: int) -> np.ndarray:
    """Integer quotas proportional to integer ``mass`` summing exactly to ``total``.

    Remainder units go to the largest fractional parts; ties favor lower index.
    """
    mass = np.asarray(mass, dtype=np.int64)
    S = int(mass.sum())
    if S <= 0:
        raise ValueError("total mass must be positive")
    num = [int(m) * int(total) for m in mass.tolist()]
    q = np.array([x // S for x in num], dtype=np.int64)
    rem = np.array([x % S for x in num], dtype=np.int64)
    left = int(total) - int(q.sum())
    if left:
        order = np.lexsort((np.arange(len(rem)), -rem))
        q[order[:left]] += 1
    return q


@dataclass
class Assembly:
    u: np.ndarray
    v: np.ndarray
    t: np.ndarray
    quotas: dict  # timestamp -> quota
    spilled: int


def assemble(alpha: AlphaCounts, target_edges: int, seed: int = 0) -> Assembly:
    if target_edges < 1:
        raise ValueError("target_edges must be >= 1")
    if len(alpha) == 0:
        raise ValueError("no synthetic triples to assemble")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 8]))
    by_t: dict = {}
    for (a, b, t), c in sorted(alpha.counts.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1])):
        by_t.setdefault(t, []).append((a, b, c))
    ts = list(by_t)
    q = largest_remainder([sum(x[2] for x in by_t[t]) for t in ts], target_edges)
    chosen = set()
    unmet = 0
    for t, quota in zip(ts, q.tolist()):
        rows = by_t[t]
        k = min(quota, len(rows))
        unmet += quota - k
        if k == 0:
            continue
        c = np.array([r[2] for r in rows], dtype=np.float64)
        pick = rng.choice(len(rows), size=k, replace=False, p=c / c.sum())
        chosen.update((rows[i][0], rows[i][1], t) for i in pick.tolist())
    spilled = 0
    if unmet:
        rest = sorted((k for k in alpha.counts if k not in chosen),
                      key=lambda k: (-alpha.counts[k], k[2], k[0], k[1]))
        extra = rest[:unmet]
        chosen.update(extra)
        spilled = len(extra)
    out = sorted(chosen, key=lambda k: (k[2], k[0], k[1]))
    arr_u = np.array([k[0] for k in out], dtype=np.int64)
    arr_v = np.array([k[1] for k in out], dtype=np.int64)
    arr_t = np.array([k[2] for k in out], dtype=np.float64)
    return Assembly(arr_u, arr_v, arr_t, dict(zip(ts, q.tolist())), spilled)


@dataclass
class GeneratedGraph:
    graph: TemporalGraph
    provenance: dict

    def write(self, path, use_labels: bool = False) -> None:
        from .graph import save_edge_list
        save_edge_list(self.graph, path, use_labels=use_labels)
        write_provenance(str(path) + ".provenance", self.provenance)


def build_graph(asm: Assembly, num_nodes: int, provenance: dict | None = None) -> GeneratedGraph:
    g = TemporalGraph(num_nodes, asm.u, asm.v, asm.t)
    return GeneratedGraph(g, dict(provenance or {}))


def model_hash(params: dict) -> str:
    h = hashlib.sha256()
    for k in sorted(params):
        h.update(k.encode())
        h.update(np.ascontiguousarray(params[k], dtype="<f8").tobytes())
    return h.hexdigest()[:16]


def write_provenance(path, prov: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k in sorted(prov):
            val = prov[k]
            fh.write(f"{k}={format_time(val) if isinstance(val, float) else val}\n")


def read_provenance(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and "=" in line:
                k, v = line.split("=", 1)
                out[k] = v
    return out
