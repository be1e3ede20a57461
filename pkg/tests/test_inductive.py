import numpy as np
import pytest

from tempgen import inductive
from tempgen.walker import WalkSet

from modelcases import inductive_case


@pytest.mark.parametrize("seed", range(3))
def test_gradients(seed):
    model, walk = inductive_case(seed)
    assert inductive.grad_check(model, walk) < 1e-4


def test_cluster_posterior_normalized():
    model, walk = inductive_case(5)
    o = np.random.default_rng(0).normal(size=model.params["cluster_head"].shape[1])
    lp = inductive.cluster_log_posterior(model, o)
    assert lp.shape == (model.n_clusters,) and np.exp(lp).sum() == pytest.approx(1.0)


def test_kl_zero_at_prior():
    model, _ = inductive_case(1)
    model.params["lat_mu"][:] = 0.0
    model.params["lat_sigma"][:] = 0.0
    o = np.ones(model.params["lat_mu"].shape[2])
    assert inductive.kl_term(model, o, 0) == pytest.approx(0.0, abs=1e-12)


def test_nearest_nodes():
    table = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert inductive.nearest_nodes(np.array([[2.0, 0.1], [0.1, 3.0], [5.0, 5.2]]), table).tolist() == [0, 1, 2]
    with pytest.raises(ValueError):
        inductive.nearest_node(np.zeros(2), table)


def test_strip_end():
    ws = WalkSet([[0, 1, 5], [2, 5, -1], [3, 4, 1]], np.zeros((3, 3)), [3, 2, 3], 5)
    out = inductive.strip_end(ws)
    assert out.lengths.tolist() == [2, 1, 3]
    assert out.nodes[0].tolist() == [0, 1, -1]


def test_generated_ids_in_range():
    model, _ = inductive_case(2)
    table = np.random.default_rng(0).normal(size=(17, model.emb.shape[1]))
    ws = inductive.generate_walks_inductive(model, table, np.zeros(50, np.int64), np.zeros(50), 4, seed=1)
    assert ws.nodes.min() >= 0 and ws.nodes.max() < 17
    assert np.all(np.diff(ws.times, axis=1) > 0)


def test_embedding_file_round_trip(tmp_path):
    t = np.random.default_rng(0).normal(size=(5, 3))
    inductive.save_embeddings(tmp_path / "e.txt", t)
    assert np.array_equal(inductive.load_embeddings(tmp_path / "e.txt"), t)
