"""Temporal random walks: neighborhoods, jump distribution, alias tables.

A walk opens with ``(u, t)`` of a uniformly chosen edge ``(u, v, t)`` and
then repeatedly jumps through an edge of the current node's temporal
neighborhood (incident edges strictly later than the current time). The
jump probability decays exponentially with the time gap. When the
neighborhood is empty before the length cap is reached, the END sentinel
(node index ``N``) is appended.
"""
from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernels
from .graph import TemporalEdge, TemporalGraph, format_time

DEFAULT_WINDOW = 500
CHUNK = 4096  # walks per derived random stream; independent of thread count


def temporal_neighborhood(g: TemporalGraph, v: int, t: float, window: int | None = None):
    """Incident edges of ``v`` later than ``t``: ascending ``(neighbor, time)`` pairs."""
    a, b = int(g.indptr[v]), int(g.indptr[v + 1])
    p = a + int(np.searchsorted(g.adj_t[a:b], t, side="right"))
    stop = b if not window or window <= 0 else min(p + window, b)
    return list(zip(g.adj_nbr[p:stop].tolist(), g.adj_t[p:stop].tolist()))


def jump_distribution(current_time: float, nbrs) -> np.ndarray:
    """Softmax of negative time gaps, shifted by the smallest gap."""
    if len(nbrs) == 0:
        raise ValueError("empty temporal neighborhood")
    times = np.array([nt for _, nt in nbrs], dtype=np.float64)
    if np.any(times <= current_time):
        raise ValueError("neighborhood contains a non-future edge")
    logits = current_time - times
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


@dataclass(frozen=True)
class AliasTable:
    prob: np.ndarray
    alias: np.ndarray

    def __len__(self) -> int:
        return len(self.prob)

    def draw(self, rng: np.random.Generator, size: int | None = None):
        if size is None:
            return kernels.backend.alias_draw(self.prob, self.alias, rng.random())
        return kernels.backend.alias_draw_many(self.prob, self.alias, rng.random(size))

    def probabilities(self) -> np.ndarray:
        """Reconstruct the per-outcome distribution encoded by the table."""
        n = len(self.prob)
        out = self.prob / n
        np.add.at(out, self.alias, (1.0 - self.prob) / n)
        return out


def build_alias(p) -> AliasTable:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("probability vector must be 1-D and non-empty")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    prob, alias = kernels.backend.alias_build(p)
    return AliasTable(prob, alias)


@dataclass(frozen=True)
class Walk:
    """Sequence of ``(node, time)`` steps; ``end_node`` marks the END sentinel."""

    nodes: np.ndarray
    times: np.ndarray
    end_node: int

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def has_end(self) -> bool:
        return len(self.nodes) > 0 and int(self.nodes[-1]) == self.end_node

    @property
    def steps(self) -> list[tuple[int, float]]:
        return list(zip(self.nodes.tolist(), self.times.tolist()))

    def edges(self) -> list[tuple[int, int, float]]:
        """Consecutive ``(prev, next, next_time)`` triples, END excluded."""
        n = self.nodes.tolist()
        t = self.times.tolist()
        return [(n[i - 1], n[i], t[i]) for i in range(1, len(n)) if n[i] != self.end_node]

    def format(self) -> str:
        return " ".join("END" if v == self.end_node else f"{v}:{format_time(t)}"
                        for v, t in zip(self.nodes.tolist(), self.times.tolist()))


class WalkSet:
    """Padded batch of walks plus the first tuples used to seed generation.

    ``nodes``/``times`` have shape ``(n_walks, max_len)``; entries past
    ``lengths[i]`` are padding (node -1).
    """

    def __init__(self, nodes, times, lengths, end_node: int):
        self.nodes = np.asarray(nodes, dtype=np.int64)
        self.times = np.asarray(times, dtype=np.float64)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.end_node = int(end_node)

    def __len__(self) -> int:
        return len(self.lengths)

    def __getitem__(self, i) -> Walk:
        k = int(self.lengths[i])
        return Walk(self.nodes[i, :k].copy(), self.times[i, :k].copy(), self.end_node)

    def __iter__(self) -> Iterator[Walk]:
        for i in range(len(self)):
            yield self[i]

    @property
    def first(self) -> tuple[np.ndarray, np.ndarray]:
        """The seed collection: first ``(node, time)`` of every walk."""
        return self.nodes[:, 0].copy(), self.times[:, 0].copy()

    def select(self, idx) -> "WalkSet":
        idx = np.asarray(idx)
        return WalkSet(self.nodes[idx], self.times[idx], self.lengths[idx], self.end_node)

    @classmethod
    def from_walks(cls, walks, end_node: int) -> "WalkSet":
        walks = list(walks)
        width = max((len(w) for w in walks), default=1)
        nodes = np.full((len(walks), width), -1, dtype=np.int64)
        times = np.zeros((len(walks), width), dtype=np.float64)
        lengths = np.zeros(len(walks), dtype=np.int64)
        for i, w in enumerate(walks):
            k = len(w)
            nodes[i, :k] = w.nodes
            times[i, :k] = w.times
            times[i, k:] = w.times[-1] if k else 0.0
            lengths[i] = k
        return cls(nodes, times, lengths, end_node)

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for w in self:
                fh.write(w.format() + "\n")


class Walker:
    """Samples temporal walks on one graph, caching alias tables across calls."""

    def __init__(self, g: TemporalGraph, window: int | None = DEFAULT_WINDOW,
                 cache_budget: int = 1_000_000, backend: str | None = None):
        self.g = g
        self.window = int(window) if window else 0
        self.kernels = kernels.get_backend(backend)
        self.cache = kernels.AliasCache(len(g.adj_t), cache_budget)
        # the kernel mutates the shared cache outside the GIL
        self._lock = threading.Lock()

    def sample(self, start_nodes, start_times, length: int, uniforms) -> WalkSet:
        if length < 1:
            raise ValueError("walk length must be >= 1")
        with self._lock:
            nodes, times, lengths = self.kernels.sample_walks(
                self.g.indptr, self.g.adj_nbr, self.g.adj_t,
                np.asarray(start_nodes, dtype=np.int64), np.asarray(start_times, dtype=np.float64),
                int(length), self.window, uniforms, self.g.num_nodes, self.cache)
        return WalkSet(nodes, times, lengths, self.g.num_nodes)


def sample_walk(g: TemporalGraph, start_edge: TemporalEdge, length: int,
                window: int | None = DEFAULT_WINDOW, rng: np.random.Generator | None = None,
                walker: Walker | None = None) -> Walk:
    rng = rng if rng is not None else np.random.default_rng()
    walker = walker or Walker(g, window)
    ws = walker.sample([start_edge.u], [start_edge.t], length, rng.random((1, length)))
    return ws[0]


def sample_walk_set(g: TemporalGraph, count: int | None, length: int,
                    window: int | None = DEFAULT_WINDOW, seed: int = 0,
                    threads: int = 1, walker: Walker | None = None) -> WalkSet:
    """Sample a set of training walks.

    ``count=None`` is epoch mode: exactly one walk from every temporal edge,
    in edge order. Otherwise ``count`` start edges are drawn uniformly with
    replacement. Randomness comes from one derived stream per chunk of
    ``CHUNK`` walks, so the result does not depend on ``threads``.
    """
    if count is not None and count < 1:
        raise ValueError("count must be >= 1")
    if g.num_edges == 0:
        raise ValueError("graph has no edges")
    walker = walker or Walker(g, window)
    ss = np.random.SeedSequence(seed)
    pick_rng = np.random.default_rng(ss.spawn(1)[0])
    if count is None:
        eids = np.arange(g.num_edges)
    else:
        eids = pick_rng.integers(0, g.num_edges, size=count)
    n = len(eids)
    n_chunks = math.ceil(n / CHUNK)
    streams = np.random.SeedSequence([seed, 1]).spawn(n_chunks)

    def run(c):
        sl = slice(c * CHUNK, min(n, (c + 1) * CHUNK))
        e = eids[sl]
        u = np.random.default_rng(streams[c]).random((len(e), length))
        return walker.sample(g.src[e], g.t[e], length, u)

    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(run, range(n_chunks)))
    else:
        parts = [run(c) for c in range(n_chunks)]
    return WalkSet(np.concatenate([p.nodes for p in parts]),
                   np.concatenate([p.times for p in parts]),
                   np.concatenate([p.lengths for p in parts]), g.num_nodes)


def load_walk_dump(path, end_node: int) -> WalkSet:
    walks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            nodes, times = [], []
            for tok in line.split():
                if tok == "END":
                    nodes.append(end_node)
                    times.append(times[-1] if times else 0.0)
                else:
                    v, t = tok.split(":")
                    nodes.append(int(v))
                    times.append(float(t))
            walks.append(Walk(np.array(nodes, dtype=np.int64), np.array(times), end_node))
    return WalkSet.from_walks(walks, end_node)
