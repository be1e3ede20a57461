import numpy as np
import pytest

from tempgen import nn


def test_time2vec_layout():
    out = nn.time2vec(np.array([2.0, 3.0]), np.array([0.5, 0.1]), np.array([1.0, 2.0]))
    assert np.allclose(out[:, 0], [2.5, 4.5])
    assert np.allclose(out[:, 1], np.sin([3.1, 6.1]))


def test_time2vec_gradient():
    rng = np.random.default_rng(0)
    P = {"w": rng.normal(size=5), "z": rng.normal(size=5)}
    t = rng.uniform(size=(3, 4))
    D = rng.normal(size=(3, 4, 5))
    gw, gz = nn.time2vec_backward(P["w"], P["z"], t, D)
    err = nn.finite_difference_check(lambda: (nn.time2vec(P["w"], P["z"], t) * D).sum(), P, {"w": gw, "z": gz})
    assert max(err.values()) < 1e-6


@pytest.mark.parametrize("layers", [1, 2])
def test_stacked_lstm_gradient(layers):
    rng = np.random.default_rng(layers)
    net = nn.StackedLSTM(layers)
    P = nn.StackedLSTM.init(rng, 3, 4, layers)
    X = rng.normal(size=(2, 5, 3))
    D = rng.normal(size=(2, 5, 4))
    out, caches = net.forward(P, X)
    grads = {k: np.zeros_like(v) for k, v in P.items()}
    net.backward(P, D, caches, grads)
    err = nn.finite_difference_check(lambda: (net.forward(P, X)[0] * D).sum(), P, grads)
    assert max(err.values()) < 1e-5


def test_lstm_step_matches_forward():
    rng = np.random.default_rng(4)
    net = nn.StackedLSTM(2)
    P = nn.StackedLSTM.init(rng, 3, 4, 2)
    X = rng.normal(size=(2, 6, 3))
    full, _ = net.forward(P, X)
    state = net.zero_state(P, 2)
    for s in range(6):
        o, state = net.step(P, X[:, s], state)
        assert np.allclose(o, full[:, s], atol=1e-12)


def test_forget_bias_and_clip():
    p = nn.lstm_init(np.random.default_rng(0), 2, 3, "l0")
    assert p["l0b"].tolist() == [0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0]
    g = {"a": np.full(4, 3.0)}
    norm = nn.clip_grad_norm(g, 1.0)
    assert norm == pytest.approx(6.0) and np.linalg.norm(g["a"]) == pytest.approx(1.0)


def test_adam_minimizes_quadratic():
    P = {"x": np.array([3.0, -2.0])}
    opt = nn.Adam(P, lr=0.1)
    for _ in range(500):
        opt.step(P, {"x": 2 * P["x"]})
    assert np.abs(P["x"]).max() < 1e-2
