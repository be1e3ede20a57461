import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from tempgen import kernels
from tempgen.graph import TemporalEdge
from tempgen.walker import (Walker, WalkSet, build_alias, jump_distribution, load_walk_dump, sample_walk,
                            sample_walk_set, temporal_neighborhood)

from conftest import random_temporal_graph


def brute_softmax(t, nbrs):
    z = np.array([-(nt - t) for _, nt in nbrs])
    e = np.exp(z - z.max())
    return e / e.sum()


def test_jump_distribution_matches_softmax():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(1, 30))
        t = rng.uniform(0, 5)
        nbrs = [(int(i), t + rng.uniform(1e-3, 20)) for i in range(k)]
        assert np.allclose(jump_distribution(t, nbrs), brute_softmax(t, nbrs), atol=1e-12, rtol=0)


def test_jump_distribution_rejects_past_edges():
    with pytest.raises(ValueError):
        jump_distribution(2.0, [(1, 2.0)])
    with pytest.raises(ValueError):
        jump_distribution(2.0, [])


def test_temporal_neighborhood(small_graph):
    assert temporal_neighborhood(small_graph, 0, 1.0) == [(2, 3.0), (3, 5.0)]
    assert temporal_neighborhood(small_graph, 0, 1.0, window=1) == [(2, 3.0)]
    assert temporal_neighborhood(small_graph, 4, 6.0) == []


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=40))
def test_alias_encodes_distribution(w):
    w = np.array(w) + 1e-3
    p = w / w.sum()
    table = build_alias(p)
    assert np.allclose(table.probabilities(), p, atol=1e-12)


def test_alias_chi_square():
    rng = np.random.default_rng(1)
    p = rng.dirichlet(np.ones(12))
    draws = build_alias(p).draw(rng, 200_000)
    obs = np.bincount(draws, minlength=12)
    assert stats.chisquare(obs, p * len(draws)).pvalue > 1e-3


def test_walk_starts_at_source_of_edge(small_graph):
    w = sample_walk(small_graph, TemporalEdge(0, 1, 1.0), 5, rng=np.random.default_rng(0))
    assert w.steps[0] == (0, 1.0)
    assert w.nodes[1] in (2, 3)


def test_walk_ends_with_sentinel(small_graph):
    w = sample_walk(small_graph, TemporalEdge(3, 4, 6.0), 5, rng=np.random.default_rng(0))
    assert w.nodes.tolist() == [3, small_graph.num_nodes]
    assert w.has_end and w.edges() == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_walks_are_time_increasing_along_edges(seed, length):
    g = random_temporal_graph(np.random.default_rng(seed), n=10, m=40, T=8)
    keys = g.edge_keys()
    ws = sample_walk_set(g, 50, length, seed=seed)
    for w in ws:
        real = [(v, t) for v, t in w.steps if v != g.num_nodes]
        assert all(b[1] > a[1] for a, b in zip(real, real[1:]))
        for a, b in zip(real, real[1:]):
            assert (min(a[0], b[0]), max(a[0], b[0]), b[1]) in keys
        assert len(w) <= length


def test_epoch_mode_one_walk_per_edge(rand_graph):
    ws = sample_walk_set(rand_graph, None, 6, seed=3)
    assert len(ws) == rand_graph.num_edges
    assert np.array_equal(ws.first[0], rand_graph.src)


@pytest.mark.skipif(kernels.BACKEND_NAME != "cython", reason="compiled kernels not built")
def test_backends_identical(rand_graph):
    u = np.random.default_rng(0).random((300, 8))
    starts = np.arange(300) % rand_graph.num_edges
    out = [Walker(rand_graph, 3, backend=b).sample(rand_graph.src[starts], rand_graph.t[starts], 8, u)
           for b in ("python", "cython")]
    assert np.array_equal(out[0].nodes, out[1].nodes)
    assert np.array_equal(out[0].times, out[1].times)


def test_thread_count_and_cache_flush_do_not_change_walks():
    g = random_temporal_graph(np.random.default_rng(2), n=30, m=400, T=20)
    a = sample_walk_set(g, 9000, 10, seed=5, threads=1)
    b = sample_walk_set(g, 9000, 10, seed=5, threads=4)
    tiny = Walker(g, cache_budget=64)
    c = sample_walk_set(g, 9000, 10, seed=5, walker=tiny)
    assert tiny.cache.flushes[0] > 0
    for x in (b, c):
        assert np.array_equal(a.nodes, x.nodes) and np.array_equal(a.times, x.times)


def test_walk_dump_round_trip(tmp_path, rand_graph):
    ws = sample_walk_set(rand_graph, 30, 5, seed=1)
    ws.dump(tmp_path / "w.txt")
    back = load_walk_dump(tmp_path / "w.txt", rand_graph.num_nodes)
    assert [w.steps for w in back] == [w.steps for w in ws]
    assert isinstance(back, WalkSet)
