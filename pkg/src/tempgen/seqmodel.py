"""Transductive recurrent generative model over temporal walks.

Each walk step ``(v, t)`` is embedded as ``node_table[v] || time2vec(t)``
and fed to a two-layer LSTM whose top hidden state ``o`` predicts the next
node (softmax over ``N + 1`` entries, the last being END) and, given that
node, the gap to the next event (log-normal mixture on
``node_table[next] || o``). Training uses teacher forcing and minimizes the
summed negative log-likelihood of positions ``2..len``; the constant
first-step term ``log(1/M)`` is not optimized.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import log_softmax

from . import nn, tpp
from .walker import Walk, WalkSet

log = logging.getLogger(__name__)

GEN_CHUNK = 2048


class NumericalError(RuntimeError):
    """Training produced a non-finite loss or gradient."""


@dataclass
class TrainConfig:
    walk_len: int = 20
    d_v: int = 100
    d_t: int = 64
    d_o: int = 200  # also the LSTM hidden size; o is the top hidden state
    n_components: int = 128
    n_layers: int = 2
    lr: float = 1e-3
    batch_size: int = 128
    epochs: int = 10
    clip: float = 5.0
    window: int = 500
    seed: int = 0

    def __post_init__(self):
        for name in ("walk_len", "d_v", "d_t", "d_o", "n_components", "n_layers", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.d_t < 2:
            raise ValueError("d_t must be >= 2 (one linear and at least one periodic component)")
        if self.walk_len < 2:
            raise ValueError("walk_len must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)


def time_affine(t_min: float, t_max: float) -> tuple[float, float]:
    """Offset and scale mapping the observed time range onto [0, 1]."""
    span = t_max - t_min
    return float(t_min), (1.0 / span if span > 0 else 1.0)


class TransductiveModel:
    kind = "transductive"

    def __init__(self, params: dict, num_nodes: int, cfg: TrainConfig,
                 time_offset: float = 0.0, time_scale: float = 1.0):
        self.params = params
        self.num_nodes = int(num_nodes)
        self.cfg = cfg
        self.time_offset = float(time_offset)
        self.time_scale = float(time_scale)
        self.rnn = nn.StackedLSTM(cfg.n_layers)

    @property
    def end_node(self) -> int:
        return self.num_nodes

    @classmethod
    def init(cls, num_nodes: int, cfg: TrainConfig, rng: np.random.Generator | int | None = None,
             time_offset: float = 0.0, time_scale: float = 1.0) -> "TransductiveModel":
        rng = np.random.default_rng(rng)
        dv, dt, do, C = cfg.d_v, cfg.d_t, cfg.d_o, cfg.n_components
        p = {
            "node_table": rng.normal(0.0, 0.1, (num_nodes + 1, dv)),
            "t2v_omega": nn.time2vec_init_freq(rng, dt),
            "t2v_zeta": rng.uniform(-np.pi, np.pi, dt),
        }
        p.update(nn.StackedLSTM.init(rng, dv + dt, do, cfg.n_layers))
        p["node_head"] = nn.uniform_init(rng, (num_nodes + 1, do), 1.0 / math.sqrt(do))
        for k in ("mix_mu", "mix_sigma", "mix_phi"):
            p[k] = nn.uniform_init(rng, (C, dv + do), 1.0 / math.sqrt(dv + do))
        return cls(p, num_nodes, cfg, time_offset, time_scale)

    @classmethod
    def zeros(cls, num_nodes: int, cfg: TrainConfig) -> "TransductiveModel":
        m = cls.init(num_nodes, cfg, 0)
        for v in m.params.values():
            v[...] = 0.0
        return m

    def copy(self, dtype=None) -> "TransductiveModel":
        return TransductiveModel({k: v.astype(dtype or v.dtype) for k, v in self.params.items()},
                                 self.num_nodes, self.cfg, self.time_offset, self.time_scale)

    # ------------------------------------------------------------ pieces

    def scaled_time(self, t):
        return (np.asarray(t, dtype=np.float64) - self.time_offset) * self.time_scale

    def time_features(self, t):
        return nn.time2vec(self.params["t2v_omega"], self.params["t2v_zeta"], self.scaled_time(t))

    def step_input(self, nodes, times):
        nodes = np.asarray(nodes)
        if np.any((nodes < 0) | (nodes > self.num_nodes)):
            raise IndexError("node index out of range")
        return np.concatenate([self.params["node_table"][nodes], self.time_features(times)], axis=-1)

    def initial_state(self, batch: int = 1):
        return self.rnn.zero_state(self.params, batch)

    def rnn_step(self, state, node, time):
        """One recurrence step from ``state`` fed with ``(node, time)``; returns ``(o, state)``."""
        x = self.step_input(np.atleast_1d(node), np.atleast_1d(time))
        return self.rnn.step(self.params, x, state)

    def node_logits(self, o):
        return o @ self.params["node_head"].T

    def node_log_prob(self, o):
        return log_softmax(self.node_logits(o), axis=-1)

    def time_head(self, node, o):
        """Mixture parameters for the gap to ``node`` given recurrent output ``o``."""
        feats = np.concatenate([self.params["node_table"][np.atleast_1d(node)], np.atleast_2d(o)], axis=-1)
        p = self.params
        mu, _, log_sigma, logits = tpp.head_forward(feats, p["mix_mu"], p["mix_sigma"], p["mix_phi"])
        return mu, log_sigma, logits

    def mixture_params(self, node, o) -> tpp.MixtureParams:
        head = tpp.MixtureHead(self.params["mix_mu"], self.params["mix_sigma"], self.params["mix_phi"])
        return tpp.mixture_params(head, self.params["node_table"][int(node)], np.ravel(o))

    # ------------------------------------------------------ loss + grads

    def loss_and_grad(self, nodes, times, lengths, want_grad: bool = True):
        """Summed walk NLL over a padded batch, plus parameter gradients.

        Returns ``(total, per_walk, grads)``; ``grads`` is None unless
        ``want_grad``.
        """
        p = self.params
        nodes = np.asarray(nodes, dtype=np.int64)
        times = np.asarray(times, dtype=np.float64)
        lengths = np.asarray(lengths, dtype=np.int64)
        B, L = nodes.shape
        if L < 2:
            raise ValueError("walks must have length >= 2")
        steps = np.arange(1, L)
        valid = steps[None, :] < lengths[:, None]  # (B, L-1): target position exists
        tgt = np.where(valid, nodes[:, 1:], 0)
        if np.any(tgt > self.num_nodes) or np.any(tgt < 0):
            raise IndexError("node index out of range")
        inp = np.where(nodes[:, :-1] >= 0, nodes[:, :-1], 0)
        dt = times[:, 1:] - times[:, :-1]
        tmask = valid & (tgt != self.end_node)
        if np.any(dt[tmask] <= 0):
            raise ValueError("walk timestamps must be strictly increasing")

        dv = self.cfg.d_v
        in_t = self.scaled_time(times[:, :-1])
        X = np.concatenate([p["node_table"][inp], nn.time2vec(p["t2v_omega"], p["t2v_zeta"], in_t)], axis=-1)
        O, caches = self.rnn.forward(p, X)

        vb, vs = np.nonzero(valid)
        Ov = O[vb, vs]
        logp = log_softmax(Ov @ p["node_head"].T, axis=-1)
        tv = tgt[vb, vs]
        node_nll = -logp[np.arange(len(tv)), tv]

        tb, ts = np.nonzero(tmask)
        Ot = O[tb, ts]
        tt = tgt[tb, ts]
        F = np.concatenate([p["node_table"][tt], Ot], axis=-1)
        mu, s_raw, _, logits = tpp.head_forward(F, p["mix_mu"], p["mix_sigma"], p["mix_phi"])
        time_nll, d_mu, d_s, d_a = tpp.mixture_nll(mu, s_raw, logits, dt[tb, ts])

        per_walk = np.zeros(B, dtype=O.dtype)
        np.add.at(per_walk, vb, node_nll)
        np.add.at(per_walk, tb, time_nll)
        total = per_walk.sum()
        if not want_grad:
            return total, per_walk, None

        g = {k: np.zeros_like(v) for k, v in p.items()}
        dO = np.zeros_like(O)
        dlog = np.exp(logp)
        dlog[np.arange(len(tv)), tv] -= 1.0
        g["node_head"] += dlog.T @ Ov
        dO[vb, vs] += dlog @ p["node_head"]

        g["mix_mu"] += d_mu.T @ F
        g["mix_sigma"] += d_s.T @ F
        g["mix_phi"] += d_a.T @ F
        dF = d_mu @ p["mix_mu"] + d_s @ p["mix_sigma"] + d_a @ p["mix_phi"]
        np.add.at(g["node_table"], tt, dF[:, :dv])
        np.add.at(dO, (tb, ts), dF[:, dv:])

        dX = self.rnn.backward(p, dO, caches, g)
        np.add.at(g["node_table"], inp.ravel(), dX[..., :dv].reshape(-1, dv))
        dom, dze = nn.time2vec_backward(p["t2v_omega"], p["t2v_zeta"], in_t, dX[..., dv:])
        g["t2v_omega"] += dom
        g["t2v_zeta"] += dze
        return total, per_walk, g

    def walk_nll(self, walk: Walk) -> float:
        total, _, _ = self.loss_and_grad(walk.nodes[None, :], walk.times[None, :], [len(walk)], want_grad=False)
        return total

    # -------------------------------------------------------- generation

    def generate(self, seed_nodes, seed_times, gen_len: int, seed: int = 0, threads: int = 1,
                 return_walks: bool = False):
        """Sample synthetic walks from seed tuples.

        Returns edge triples ``(u, v, t)`` as three arrays (and, with
        ``return_walks``, the walks as a :class:`WalkSet`). A walk stops at
        ``gen_len`` tuples or when END is drawn.
        """
        seed_nodes = np.asarray(seed_nodes, dtype=np.int64)
        seed_times = np.asarray(seed_times, dtype=np.float64)
        n = len(seed_nodes)
        n_chunks = max(1, math.ceil(n / GEN_CHUNK))
        streams = np.random.SeedSequence([seed, 2]).spawn(n_chunks)

        def run(c):
            sl = slice(c * GEN_CHUNK, min(n, (c + 1) * GEN_CHUNK))
            return self._generate_chunk(seed_nodes[sl], seed_times[sl], gen_len,
                                        np.random.default_rng(streams[c]))

        if threads > 1 and n_chunks > 1:
            with ThreadPoolExecutor(threads) as ex:
                parts = list(ex.map(run, range(n_chunks)))
        else:
            parts = [run(c) for c in range(n_chunks)]
        walks = WalkSet(np.concatenate([p[0] for p in parts]) if parts else np.zeros((0, gen_len), np.int64),
                        np.concatenate([p[1] for p in parts]) if parts else np.zeros((0, gen_len)),
                        np.concatenate([p[2] for p in parts]) if parts else np.zeros(0, np.int64),
                        self.end_node)
        u, v, t = walks_to_triples(walks)
        if return_walks:
            return (u, v, t), walks
        return u, v, t

    def _generate_chunk(self, v0, t0, gen_len, rng):
        B = len(v0)
        nodes = np.full((B, gen_len), -1, dtype=np.int64)
        times = np.zeros((B, gen_len))
        lengths = np.ones(B, dtype=np.int64)
        nodes[:, 0] = v0
        times[:, 0] = t0
        state = self.initial_state(B)
        alive = np.arange(B)
        prev_v, prev_t = v0.copy(), t0.copy()
        for i in range(1, gen_len):
            if len(alive) == 0:
                break
            o, state = self.rnn_step(state, prev_v, prev_t)
            probs = np.exp(self.node_log_prob(o))
            u = rng.random(len(alive))
            nxt = (np.cumsum(probs, axis=1) < u[:, None]).sum(axis=1)
            nxt = np.minimum(nxt, self.num_nodes)
            mu, log_sigma, logits = self.time_head(np.minimum(nxt, self.num_nodes), o)
            gap = tpp.sample_dt_batch(mu, log_sigma, logits, rng)
            ended = nxt == self.end_node
            nodes[alive, i] = nxt
            times[alive, i] = np.where(ended, prev_t, prev_t + gap)
            lengths[alive] = i + 1
            keep = ~ended
            alive = alive[keep]
            state = [(h[keep], c[keep]) for h, c in state]
            prev_v = nxt[keep]
            prev_t = (prev_t + gap)[keep]
        return nodes, times, lengths


def walks_to_triples(walks: WalkSet):
    """Consecutive ``(prev, next, next_time)`` over all walks, END excluded."""
    nodes, times, lengths = walks.nodes, walks.times, walks.lengths
    if nodes.shape[1] < 2:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), np.zeros(0)
    steps = np.arange(1, nodes.shape[1])
    ok = (steps[None, :] < lengths[:, None]) & (nodes[:, 1:] != walks.end_node)
    return nodes[:, :-1][ok], nodes[:, 1:][ok], times[:, 1:][ok]


@dataclass
class TrainHistory:
    epoch_loss: list = field(default_factory=list)
    step_loss: list = field(default_factory=list)


def train(model, walks: WalkSet | None, cfg: TrainConfig, resample=None,
          history: TrainHistory | None = None, epoch_callback=None) -> TrainHistory:
    """Minibatch Adam on the walk NLL.

    ``resample(epoch)`` (optional) returns a fresh :class:`WalkSet` for each
    epoch; otherwise ``walks`` is reused. Loss values are per-walk means.
    Works for both the transductive and the inductive model (anything with
    ``loss_and_grad(nodes, times, lengths)`` and ``params``).
    """
    history = history or TrainHistory()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3]))
    opt = nn.Adam(model.params, lr=cfg.lr, frozen=getattr(model, "frozen", ()))
    for epoch in range(cfg.epochs):
        ws = resample(epoch) if resample is not None else walks
        if ws is None or len(ws) == 0:
            raise ValueError("empty walk set")
        order = rng.permutation(len(ws))
        tot = 0.0
        for a in range(0, len(order), cfg.batch_size):
            idx = order[a:a + cfg.batch_size]
            width = int(ws.lengths[idx].max())
            if width < 2:
                continue
            extra = {"rng": rng} if getattr(model, "stochastic", False) else {}
            loss, _, grads = model.loss_and_grad(ws.nodes[idx, :width], ws.times[idx, :width],
                                                 ws.lengths[idx], **extra)
            if not math.isfinite(loss):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch starting {a}")
            for gk in grads.values():
                gk /= len(idx)
            norm = nn.clip_grad_norm(grads, cfg.clip)
            if not math.isfinite(norm):
                raise NumericalError(f"non-finite gradient at epoch {epoch}")
            opt.step(model.params, grads)
            history.step_loss.append(float(loss) / len(idx))
            tot += loss
        history.epoch_loss.append(float(tot) / len(ws))
        log.info("epoch %d loss %.4f", epoch, history.epoch_loss[-1])
        if epoch_callback is not None:
            epoch_callback(epoch, history)
    return history


def grad_check(model, walk: Walk, step: float = 1e-5) -> float:
    """Largest relative error between analytic and central-difference gradients."""
    return max(grad_check_report(model, walk, step).values())


def grad_check_report(model, walk: Walk, step: float = 1e-5) -> dict:
    """Per-parameter max relative error; the oracle runs in extended precision."""
    nodes, times, lengths = walk.nodes[None, :], walk.times[None, :], [len(walk)]
    _, _, grads = model.loss_and_grad(nodes, times, lengths)
    ref = model.copy(np.longdouble)
    return nn.finite_difference_check(
        lambda: ref.loss_and_grad(nodes, times, lengths, want_grad=False)[0],
        ref.params, grads, step=step)
