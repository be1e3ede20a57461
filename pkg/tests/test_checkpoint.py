import numpy as np
import pytest

from tempgen import checkpoint, pipeline
from tempgen.inductive import InductiveConfig
from tempgen.seqmodel import TrainConfig


def test_round_trip(tmp_path):
    t = {"a": np.arange(6.0).reshape(2, 3), "b": np.array([1, -2], dtype=np.int64), "c": np.zeros((0, 4))}
    checkpoint.save(tmp_path / "x", t, {"k": [1, 2]})
    back, header = checkpoint.load(tmp_path / "x")
    assert header == {"k": [1, 2]}
    for k in t:
        assert back[k].dtype == t[k].dtype and np.array_equal(back[k], t[k])


def test_rejects_garbage(tmp_path):
    (tmp_path / "bad").write_bytes(b"nope")
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.load(tmp_path / "bad")
    checkpoint.save(tmp_path / "ok", {"a": np.ones(100)}, {})
    data = (tmp_path / "ok").read_bytes()
    (tmp_path / "trunc").write_bytes(data[:-40])
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.load(tmp_path / "trunc")


def _same_generation(fit, back, tmp_path):
    a = pipeline.generate(fit, 3, num_walks=200, seed=1).graph.graph
    b = pipeline.generate(back, 3, num_walks=200, seed=1).graph.graph
    assert a.edge_keys() == b.edge_keys()


def test_fitted_transductive_round_trip(tmp_path, rand_graph):
    cfg = TrainConfig(walk_len=4, d_v=4, d_t=3, d_o=5, n_components=2, epochs=1)
    fit = pipeline.fit_transductive(rand_graph, cfg)
    pipeline.save_fitted(tmp_path / "m", fit)
    back = pipeline.load_fitted(tmp_path / "m")
    assert back.kind == "transductive" and back.history.epoch_loss == fit.history.epoch_loss
    _same_generation(fit, back, tmp_path)


def test_fitted_inductive_round_trip(tmp_path, rand_graph):
    cfg = InductiveConfig(walk_len=4, d_v=4, d_t=3, d_o=5, d_z=3, n_components=2, n_clusters=3, epochs=1,
                          sage_epochs=5, boost_rounds=1, wgan_epochs=2)
    fit = pipeline.fit_inductive(rand_graph, cfg)
    pipeline.save_fitted(tmp_path / "m", fit)
    back = pipeline.load_fitted(tmp_path / "m")
    assert back.kind == "inductive" and np.array_equal(back.model.clusters, fit.model.clusters)
    _same_generation(fit, back, tmp_path)
