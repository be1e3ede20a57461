import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tempgen import kmeans, sage, wgan
from tempgen.graph import StaticGraph
from tempgen.nn import finite_difference_check


def ring(n):
    return StaticGraph.from_pairs(n, [(i, (i + 1) % n) for i in range(n)])


def test_sage_gradients():
    gs = ring(7)
    rng = np.random.default_rng(0)
    model = sage.init_model(7, 4, rng)
    A = sage.mean_adjacency(gs)
    pos = sage._positive_pairs(gs)
    neg = sage.draw_negatives(pos, np.ones(7), sage._adjacency_keys(gs), 3, rng)
    _, grads = sage._loss_grad(model, A, pos, neg, 3)
    P = model.params()
    err = finite_difference_check(lambda: sage.pair_loss(sage.embed_forward(model, A), pos, neg, 3)[0], P, grads)
    assert max(err.values()) < 1e-4


def test_negatives_exclude_neighbors():
    gs = ring(9)
    pos = sage._positive_pairs(gs)
    neg = sage.draw_negatives(pos, np.ones(9), sage._adjacency_keys(gs), 4, np.random.default_rng(1))
    for (a, _), row in zip(pos.tolist(), neg.tolist()):
        for b in row:
            if b >= 0:
                assert b != a and (min(a, b), max(a, b)) not in gs.edges


def test_single_edge_becomes_likely():
    res = sage.sage_embed(StaticGraph.from_pairs(2, [(0, 1)]), d=4, epochs=300, lr=0.05)
    p = 1 / (1 + np.exp(-res.table[0] @ res.table[1]))
    assert p > 0.9


def test_boosting_doubles_false_positive_weights():
    gs = StaticGraph.from_pairs(3, [(0, 1)])
    table = np.array([[3.0, 0.0], [3.0, 0.0], [-3.0, 0.0]])
    w, n_fp = sage.boost_negatives(table, gs, np.ones(3))
    assert n_fp == 0 and w.tolist() == [1, 1, 1]
    table[2] = [3.0, 0.0]
    w, n_fp = sage.boost_negatives(table, gs, np.ones(3))
    assert n_fp == 2 and w.tolist() == [2, 2, 2]


def test_kmeans_separates_blobs():
    rng = np.random.default_rng(0)
    X = np.r_[rng.normal(0, 0.1, (30, 2)), rng.normal(5, 0.1, (30, 2))]
    m = kmeans.kmeans_fit(X, 2)
    assert len(set(m.assignment[:30])) == 1 and len(set(m.assignment[30:])) == 1
    assert m.assignment[0] != m.assignment[-1]
    assert np.all(np.diff(m.inertia) <= 1e-9)
    assert np.allclose(kmeans.kmeans_fit(X, 1).centroids[0], X.mean(0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 6))
def test_kmeans_no_empty_clusters(seed, K):
    X = np.random.default_rng(seed).integers(0, 4, (20, 2)).astype(float)
    if len(np.unique(X, axis=0)) < K:
        with pytest.raises(ValueError):
            kmeans.kmeans_fit(X, K, seed=seed)
        return
    m = kmeans.kmeans_fit(X, K, seed=seed)
    assert np.bincount(m.assignment, minlength=K).min() >= 1


def test_wgan_clips_and_improves():
    rng = np.random.default_rng(0)
    X = rng.normal(2.0, 0.3, (64, 4))
    pair = wgan.wgan_train(X, epochs=60, seed=0, hidden=32, noise_dim=8)
    assert max(np.abs(v).max() for v in pair.critic.values()) <= pair.clip + 1e-15
    dist = [-c for c, _ in pair.history]
    assert dist[-1] < 0.5 * max(dist)
    start = wgan.wgan_train(X, epochs=0, seed=0, hidden=32, noise_dim=8)
    gap = lambda p: np.linalg.norm(wgan.wgan_sample(p, 500, 1).mean(0) - X.mean(0))
    assert gap(pair) < 0.5 * gap(start)
    out = wgan.wgan_sample(pair, 10, 1)
    assert out.shape == (10, 4) and np.isfinite(out).all()
    with pytest.raises(ValueError):
        wgan.wgan_train(np.ones((5, 2)))
