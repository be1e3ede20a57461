"""Small random model configurations for gradient checks."""
import numpy as np

from tempgen.inductive import InductiveConfig, InductiveModel
from tempgen.seqmodel import TrainConfig, TransductiveModel
from tempgen.walker import Walk


def _walk(rng, N, L, end=None):
    nodes = rng.integers(0, N, L)
    if end is not None:
        nodes[-1] = end
    times = np.cumsum(rng.uniform(0.2, 2.0, L))
    return Walk(nodes.astype(np.int64), times, N)


def transductive_case(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(3, 11))
    cfg = TrainConfig(walk_len=6, d_v=int(rng.integers(2, 9)), d_t=int(rng.integers(2, 9)),
                      d_o=int(rng.integers(2, 9)), n_components=int(rng.integers(1, 5)),
                      n_layers=int(rng.integers(1, 3)))
    model = TransductiveModel.init(N, cfg, rng, time_offset=0.0, time_scale=0.1)
    for v in model.params.values():  # move away from init symmetries
        v += rng.normal(0, 0.05, v.shape)
    L = int(rng.integers(3, 7))
    return model, _walk(rng, N, L, end=N if rng.random() < 0.5 else None)


def inductive_case(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(4, 11))
    K = int(rng.integers(1, 4))
    dv = int(rng.integers(2, 9))
    cfg = InductiveConfig(walk_len=6, d_v=dv, d_t=int(rng.integers(2, 9)), d_o=int(rng.integers(2, 9)),
                          d_z=int(rng.integers(1, 9)), n_components=int(rng.integers(1, 5)),
                          n_clusters=K, n_layers=int(rng.integers(1, 3)), beta=float(rng.uniform(0.1, 1.0)))
    emb = rng.normal(size=(N, dv))
    clusters = np.r_[np.arange(K), rng.integers(0, K, N - K)]
    model = InductiveModel.init(emb, clusters, cfg, rng, time_offset=0.0, time_scale=0.1)
    for v in model.params.values():
        v += rng.normal(0, 0.05, v.shape)
    return model, _walk(rng, N, int(rng.integers(3, 7)))
