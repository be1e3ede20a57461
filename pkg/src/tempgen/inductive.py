"""Inductive recurrent model: walks over node embeddings instead of node IDs.

Nodes enter the recurrence through fixed structural embeddings ``e_v``
(transformed by a learnable ``W_f``). The next node is modelled as a
mixture over embedding-space clusters: a cluster ``k`` is chosen from a
softmax over ``o``, a latent ``z = mu_k(o) + eps * sigma_k(o)`` is drawn,
and the next embedding is Gaussian with mean ``W_muZ z`` and scale
``exp(W_sigZ z)``. Training adds ``beta * KL(q(z) || N(0, I))``. At
generation time embeddings are mapped to the closest (cosine) node of a
freshly sampled node table.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import log_softmax

from . import nn, tpp
from .seqmodel import TrainConfig, walks_to_triples
from .walker import Walk, WalkSet

SIGMA_RAW_CLIP = tpp.SIGMA_RAW_CLIP
GEN_CHUNK = 1024


@dataclass
class InductiveConfig(TrainConfig):
    d_v: int = 128  # structural embedding size
    d_z: int = 128
    n_clusters: int = 300
    beta: float = 1e-5
    sage_negatives: int = 5
    sage_epochs: int = 200
    sage_lr: float = 0.01
    boost_rounds: int = 3
    wgan_epochs: int = 200
    wgan_lr: float = 5e-4
    wgan_clip: float = 0.01

    def __post_init__(self):
        super().__post_init__()
        if self.d_z < 1 or self.n_clusters < 1:
            raise ValueError("d_z and n_clusters must be positive")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


class InductiveModel:
    kind = "inductive"
    stochastic = True

    def __init__(self, params: dict, emb, clusters, cfg: InductiveConfig,
                 time_offset: float = 0.0, time_scale: float = 1.0):
        self.params = params
        self.emb = np.asarray(emb, dtype=np.float64)
        self.clusters = np.asarray(clusters, dtype=np.int64)
        self.cfg = cfg
        self.beta = float(cfg.beta)
        self.time_offset = float(time_offset)
        self.time_scale = float(time_scale)
        self.rnn = nn.StackedLSTM(cfg.n_layers)

    @property
    def num_nodes(self) -> int:
        return len(self.emb)

    def copy(self, dtype=None) -> "InductiveModel":
        m = InductiveModel({k: v.astype(dtype or v.dtype) for k, v in self.params.items()},
                           self.emb, self.clusters, self.cfg, self.time_offset, self.time_scale)
        m.emb = self.emb.astype(dtype or self.emb.dtype)
        return m

    @property
    def n_clusters(self) -> int:
        return self.params["cluster_head"].shape[0]

    @classmethod
    def init(cls, emb, clusters, cfg: InductiveConfig, rng=None, time_offset=0.0, time_scale=1.0):
        rng = np.random.default_rng(rng)
        emb = np.asarray(emb, dtype=np.float64)
        dv = emb.shape[1]
        if dv != cfg.d_v:
            raise ValueError(f"embedding width {dv} != d_v {cfg.d_v}")
        dt, do, dz, C = cfg.d_t, cfg.d_o, cfg.d_z, cfg.n_components
        K = int(np.max(clusters)) + 1 if len(clusters) else cfg.n_clusters
        s_o, s_z = 1.0 / math.sqrt(do), 1.0 / math.sqrt(dz)
        p = {
            "embed_W": np.eye(dv) + rng.normal(0.0, 0.01, (dv, dv)),
            "t2v_omega": nn.time2vec_init_freq(rng, dt),
            "t2v_zeta": rng.uniform(-np.pi, np.pi, dt),
        }
        p.update(nn.StackedLSTM.init(rng, dv + dt, do, cfg.n_layers))
        p["cluster_head"] = nn.uniform_init(rng, (K, do), s_o)
        p["lat_mu"] = nn.uniform_init(rng, (K, dz, do), s_o)
        p["lat_sigma"] = nn.uniform_init(rng, (K, dz, do), 0.1 * s_o)
        p["dec_mu"] = nn.uniform_init(rng, (dv, dz), s_z)
        p["dec_sigma"] = nn.uniform_init(rng, (dv, dz), 0.1 * s_z)
        for k in ("mix_mu", "mix_sigma", "mix_phi"):
            p[k] = nn.uniform_init(rng, (C, dv + do), 1.0 / math.sqrt(dv + do))
        return cls(p, emb, clusters, cfg, time_offset, time_scale)

    # ------------------------------------------------------------ pieces

    def scaled_time(self, t):
        return (np.asarray(t, dtype=np.float64) - self.time_offset) * self.time_scale

    def feature(self, e):
        """Node feature ``f(v) = W_f e_v`` for embedding rows ``e``."""
        return np.asarray(e) @ self.params["embed_W"].T

    def initial_state(self, batch: int = 1):
        return self.rnn.zero_state(self.params, batch)

    def rnn_step(self, state, emb_rows, times):
        e = np.atleast_2d(emb_rows)
        x = np.concatenate([self.feature(e), nn.time2vec(self.params["t2v_omega"], self.params["t2v_zeta"],
                                                         self.scaled_time(np.atleast_1d(times)))], axis=-1)
        return self.rnn.step(self.params, x, state)

    def latent_params(self, o, k):
        """``(mu_K, raw log sigma_K)`` rows for outputs ``o`` (P, d_O) and clusters ``k`` (P,)."""
        o = np.atleast_2d(o)
        k = np.broadcast_to(np.asarray(k, dtype=np.int64), (len(o),))
        dz = self.params["lat_mu"].shape[1]
        dtype = np.result_type(o, self.params["lat_mu"])
        mu = np.empty((len(o), dz), dtype)
        a = np.empty((len(o), dz), dtype)
        for kk in np.unique(k):
            idx = k == kk
            mu[idx] = o[idx] @ self.params["lat_mu"][kk].T
            a[idx] = o[idx] @ self.params["lat_sigma"][kk].T
        return mu, a

    def decode(self, z):
        """Gaussian mean and raw log scale of the next embedding given ``z``."""
        z = np.atleast_2d(z)
        return z @ self.params["dec_mu"].T, z @ self.params["dec_sigma"].T

    # ------------------------------------------------------ loss + grads

    def loss_and_grad(self, nodes, times, lengths, rng=None, eps=None, want_grad: bool = True):
        """Summed inductive walk NLL over a padded batch of END-free walks.

        ``eps`` (shape ``(B, L-1, d_Z)``) freezes the reparameterization
        noise; otherwise it is drawn from ``rng``.
        """
        p = self.params
        nodes = np.asarray(nodes, dtype=np.int64)
        times = np.asarray(times, dtype=np.float64)
        lengths = np.asarray(lengths, dtype=np.int64)
        B, L = nodes.shape
        dv, dz = self.emb.shape[1], p["dec_mu"].shape[1]
        if L < 2:
            return 0.0, np.zeros(B), ({k: np.zeros_like(v) for k, v in p.items()} if want_grad else None)
        if eps is None:
            eps = np.random.default_rng(rng).standard_normal((B, L - 1, dz))
        steps = np.arange(1, L)
        valid = steps[None, :] < lengths[:, None]
        tgt = np.where(valid, nodes[:, 1:], 0)
        if np.any((tgt < 0) | (tgt >= self.num_nodes)):
            raise IndexError("node index out of range (END must be stripped)")
        inp = np.where(nodes[:, :-1] >= 0, nodes[:, :-1], 0)
        dt = times[:, 1:] - times[:, :-1]
        if np.any(dt[valid] <= 0):
            raise ValueError("walk timestamps must be strictly increasing")

        E_in = self.emb[inp]
        in_t = self.scaled_time(times[:, :-1])
        X = np.concatenate([E_in @ p["embed_W"].T, nn.time2vec(p["t2v_omega"], p["t2v_zeta"], in_t)], axis=-1)
        O, caches = self.rnn.forward(p, X)

        vb, vs = np.nonzero(valid)
        Ov = O[vb, vs]
        tv = tgt[vb, vs]
        k = self.clusters[tv]
        e_t = self.emb[tv]
        ev = eps[vb, vs]
        P = len(tv)
        rows = np.arange(P)

        lc = log_softmax(Ov @ p["cluster_head"].T, axis=-1)
        nll_c = -lc[rows, k]
        muK, aK_raw = self.latent_params(Ov, k)
        aK = np.clip(aK_raw, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP)
        sK = np.exp(aK)
        z = muK + ev * sK
        muZ, aZ_raw = self.decode(z)
        aZ = np.clip(aZ_raw, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP)
        r = (e_t - muZ) * np.exp(-aZ)
        nll_g = (aZ + tpp.LOG_SQRT_2PI + 0.5 * r * r).sum(axis=1)
        kl = 0.5 * (muK * muK + sK * sK - 1.0 - 2.0 * aK).sum(axis=1)
        F = np.concatenate([e_t @ p["embed_W"].T, Ov], axis=-1)
        mu, s_raw, _, logits = tpp.head_forward(F, p["mix_mu"], p["mix_sigma"], p["mix_phi"])
        nll_t, d_mu, d_s, d_a = tpp.mixture_nll(mu, s_raw, logits, dt[vb, vs])

        per_walk = np.zeros(B, dtype=O.dtype)
        np.add.at(per_walk, vb, nll_c + nll_g + nll_t + self.beta * kl)
        total = per_walk.sum()
        if not want_grad:
            return total, per_walk, None

        g = {name: np.zeros_like(v) for name, v in p.items()}
        dOv = np.zeros_like(Ov)
        # cluster term
        dl = np.exp(lc)
        dl[rows, k] -= 1.0
        g["cluster_head"] += dl.T @ Ov
        dOv += dl @ p["cluster_head"]
        # Gaussian decoder
        d_muZ = -r * np.exp(-aZ)
        d_aZ = np.where(np.abs(aZ_raw) <= SIGMA_RAW_CLIP, 1.0 - r * r, 0.0)
        g["dec_mu"] += d_muZ.T @ z
        g["dec_sigma"] += d_aZ.T @ z
        dz_ = d_muZ @ p["dec_mu"] + d_aZ @ p["dec_sigma"]
        # reparameterization + KL
        d_muK = dz_ + self.beta * muK
        d_aK = dz_ * ev * sK + self.beta * (sK * sK - 1.0)
        d_aK = np.where(np.abs(aK_raw) <= SIGMA_RAW_CLIP, d_aK, 0.0)
        for kk in np.unique(k):
            idx = k == kk
            g["lat_mu"][kk] += d_muK[idx].T @ Ov[idx]
            g["lat_sigma"][kk] += d_aK[idx].T @ Ov[idx]
            dOv[idx] += d_muK[idx] @ p["lat_mu"][kk] + d_aK[idx] @ p["lat_sigma"][kk]
        # time head
        g["mix_mu"] += d_mu.T @ F
        g["mix_sigma"] += d_s.T @ F
        g["mix_phi"] += d_a.T @ F
        dF = d_mu @ p["mix_mu"] + d_s @ p["mix_sigma"] + d_a @ p["mix_phi"]
        g["embed_W"] += dF[:, :dv].T @ e_t
        dOv += dF[:, dv:]

        dO = np.zeros_like(O)
        dO[vb, vs] = dOv
        dX = self.rnn.backward(p, dO, caches, g)
        g["embed_W"] += dX[..., :dv].reshape(-1, dv).T @ E_in.reshape(-1, dv)
        dom, dze = nn.time2vec_backward(p["t2v_omega"], p["t2v_zeta"], in_t, dX[..., dv:])
        g["t2v_omega"] += dom
        g["t2v_zeta"] += dze
        return total, per_walk, g

    def walk_nll(self, walk: Walk, eps=None, rng=None) -> float:
        return self.loss_and_grad(walk.nodes[None, :], walk.times[None, :], [len(walk)],
                                  rng=rng, eps=eps, want_grad=False)[0]


# ------------------------------------------------------- model pieces

def cluster_log_posterior(model: InductiveModel, o) -> np.ndarray:
    return log_softmax(model.params["cluster_head"] @ np.ravel(o))


def sample_z(model: InductiveModel, o, k: int, rng=None, eps=None) -> np.ndarray:
    if not 0 <= k < model.n_clusters:
        raise IndexError(f"cluster {k} out of range")
    mu, a = model.latent_params(np.ravel(o)[None, :], [k])
    if eps is None:
        eps = np.random.default_rng(rng).standard_normal(mu.shape[1])
    return (mu + np.asarray(eps) * np.exp(np.clip(a, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP)))[0]


def decoder_log_prob(model: InductiveModel, o, k: int, target, rng=None, eps=None) -> float:
    """Cluster log-posterior at ``k`` plus the one-sample Gaussian log-density of ``target``."""
    z = sample_z(model, o, k, rng=rng, eps=eps)
    muZ, a = model.decode(z)
    a = np.clip(a[0], -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP)
    r = (np.asarray(target, dtype=np.float64) - muZ[0]) * np.exp(-a)
    gauss = float(-(a + tpp.LOG_SQRT_2PI + 0.5 * r * r).sum())
    return float(cluster_log_posterior(model, o)[k]) + gauss


def kl_term(model: InductiveModel, o, k: int) -> float:
    mu, a = model.latent_params(np.ravel(o)[None, :], [k])
    a = np.clip(a, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP)
    return float(0.5 * (mu * mu + np.exp(2 * a) - 1.0 - 2.0 * a).sum())


def strip_end(ws: WalkSet) -> WalkSet:
    """Drop trailing END tuples (they carry no embedding)."""
    lengths = ws.lengths.copy()
    last = ws.nodes[np.arange(len(ws)), np.maximum(lengths - 1, 0)]
    lengths[(last == ws.end_node) & (lengths > 0)] -= 1
    nodes = ws.nodes.copy()
    cols = np.arange(nodes.shape[1])
    nodes[cols[None, :] >= lengths[:, None]] = -1
    return WalkSet(nodes, ws.times, lengths, ws.end_node)


def grad_check_report(model: InductiveModel, walk: Walk, step: float = 1e-5, seed: int = 0) -> dict:
    nodes, times, lengths = walk.nodes[None, :], walk.times[None, :], [len(walk)]
    eps = np.random.default_rng(seed).standard_normal((1, max(len(walk) - 1, 1), model.params["dec_mu"].shape[1]))
    _, _, grads = model.loss_and_grad(nodes, times, lengths, eps=eps)
    ref = model.copy(np.longdouble)
    return nn.finite_difference_check(
        lambda: ref.loss_and_grad(nodes, times, lengths, eps=eps, want_grad=False)[0],
        ref.params, grads, step=step)


def grad_check(model: InductiveModel, walk: Walk, step: float = 1e-5, seed: int = 0) -> float:
    return max(grad_check_report(model, walk, step, seed).values())


# ----------------------------------------------------------- nearest node

def _unit_rows(T):
    T = np.asarray(T, dtype=np.float64)
    norms = np.linalg.norm(T, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero-norm embedding has no cosine similarity")
    return T / norms[:, None]


def nearest_nodes(queries, table, chunk: int = 4096) -> np.ndarray:
    """Index of the most cosine-similar table row for every query (lowest index on ties)."""
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or len(table) == 0:
        raise ValueError("node table must be a non-empty 2-D array")
    Q = _unit_rows(np.atleast_2d(queries))
    Tn = _unit_rows(table)
    out = np.empty(len(Q), dtype=np.int64)
    for a in range(0, len(Q), chunk):
        out[a:a + chunk] = np.argmax(Q[a:a + chunk] @ Tn.T, axis=1)
    return out


def nearest_node(query, table) -> int:
    return int(nearest_nodes(np.ravel(query)[None, :], table)[0])


# -------------------------------------------------------------- generation

def generate_embedding_walks(model: InductiveModel, seed_emb, seed_times, gen_len: int, rng):
    """Sample ``gen_len``-step walks in embedding space; returns ``(E, times)``."""
    S = len(seed_emb)
    dv = model.emb.shape[1]
    E = np.empty((S, gen_len, dv))
    T = np.empty((S, gen_len))
    E[:, 0] = seed_emb
    T[:, 0] = seed_times
    state = model.initial_state(S)
    p = model.params
    for i in range(1, gen_len):
        o, state = model.rnn_step(state, E[:, i - 1], T[:, i - 1])
        probs = np.exp(log_softmax(o @ p["cluster_head"].T, axis=-1))
        k = np.minimum((np.cumsum(probs, axis=1) < rng.random(S)[:, None]).sum(axis=1), model.n_clusters - 1)
        muK, aK = model.latent_params(o, k)
        z = muK + rng.standard_normal(muK.shape) * np.exp(np.clip(aK, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP))
        muZ, aZ = model.decode(z)
        e = muZ + rng.standard_normal(muZ.shape) * np.exp(np.clip(aZ, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP))
        F = np.concatenate([model.feature(e), o], axis=-1)
        mu, _, log_sigma, logits = tpp.head_forward(F, p["mix_mu"], p["mix_sigma"], p["mix_phi"])
        E[:, i] = e
        T[:, i] = T[:, i - 1] + tpp.sample_dt_batch(mu, log_sigma, logits, rng)
    return E, T


def generate_walks_inductive(model: InductiveModel, node_table, seed_nodes, seed_times, gen_len: int,
                             seed: int = 0, threads: int = 1) -> WalkSet:
    """Walks over generated node IDs ``0..N'-1`` (no END entries)."""
    node_table = np.asarray(node_table, dtype=np.float64)
    seed_nodes = np.asarray(seed_nodes, dtype=np.int64)
    seed_times = np.asarray(seed_times, dtype=np.float64)
    n = len(seed_nodes)
    n_chunks = max(1, math.ceil(n / GEN_CHUNK))
    streams = np.random.SeedSequence([seed, 7]).spawn(n_chunks)

    def run(c):
        sl = slice(c * GEN_CHUNK, min(n, (c + 1) * GEN_CHUNK))
        E, T = generate_embedding_walks(model, model.emb[seed_nodes[sl]], seed_times[sl], gen_len,
                                        np.random.default_rng(streams[c]))
        ids = nearest_nodes(E.reshape(-1, E.shape[2]), node_table).reshape(E.shape[:2])
        return ids, T

    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(run, range(n_chunks)))
    else:
        parts = [run(c) for c in range(n_chunks)]
    nodes = np.concatenate([q[0] for q in parts]) if n else np.zeros((0, gen_len), np.int64)
    times = np.concatenate([q[1] for q in parts]) if n else np.zeros((0, gen_len))
    return WalkSet(nodes, times, np.full(len(nodes), gen_len), len(node_table))


def generate_triples(model, node_table, seed_nodes, seed_times, gen_len, seed=0, threads=1):
    return walks_to_triples(generate_walks_inductive(model, node_table, seed_nodes, seed_times,
                                                     gen_len, seed, threads))


# ------------------------------------------------------------------ files

def save_embeddings(path, table) -> None:
    table = np.asarray(table, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{table.shape[0]} {table.shape[1]}\n")
        for row in table:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_embeddings(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        n, d = (int(x) for x in fh.readline().split())
        data = np.loadtxt(fh, dtype=np.float64, ndmin=2)
    if data.shape != (n, d) and not (n == 0 and data.size == 0):
        raise ValueError(f"{path}: expected {n}x{d} table, got {data.shape}")
    return data.reshape(n, d)
