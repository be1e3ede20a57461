"""Unsupervised one-hop mean-aggregator node embeddings with boosted negatives.

Representation: ``h_v = tanh(x_v W_self + mean_{u in N(v)} x_u W_nbr)`` with
learnable self vectors ``x``. Per positive pair ``(v, j)`` the loss is

    -log sigmoid(h_v . h_j) - Q * mean_k sigmoid(-h_v . h_k)

with ``Q`` negatives ``k`` drawn from ``P_n`` (non-neighbors of ``v``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, log_expit

from .graph import StaticGraph
from .nn import Adam


@dataclass
class SageModel:
    X: np.ndarray
    W_self: np.ndarray
    W_nbr: np.ndarray

    def params(self) -> dict:
        return {"X": self.X, "W_self": self.W_self, "W_nbr": self.W_nbr}


def mean_adjacency(gs: StaticGraph) -> sp.csr_matrix:
    n = gs.num_nodes
    e = gs.edge_array()
    if len(e) == 0:
        return sp.csr_matrix((n, n))
    rows = np.r_[e[:, 0], e[:, 1]]
    cols = np.r_[e[:, 1], e[:, 0]]
    A = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    deg = np.asarray(A.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros(n), where=deg > 0)
    return sp.diags(inv) @ A


def embed_forward(model: SageModel, A):
    pre = model.X @ model.W_self + A @ (model.X @ model.W_nbr)
    return np.tanh(pre)


def pair_loss(H, pos, neg, Q: int):
    """Mean loss over positive pairs; ``neg`` is (P, Q) with -1 for missing negatives."""
    s_pos = np.einsum("ij,ij->i", H[pos[:, 0]], H[pos[:, 1]])
    mask = neg >= 0
    s_neg = np.einsum("pd,pqd->pq", H[pos[:, 0]], H[np.where(mask, neg, 0)])
    cnt = np.maximum(mask.sum(axis=1), 1)
    per = -log_expit(s_pos) - Q * (expit(-s_neg) * mask).sum(axis=1) / cnt
    return float(per.mean()), s_pos, s_neg, mask, cnt


def _loss_grad(model, A, pos, neg, Q):
    H = embed_forward(model, A)
    loss, s_pos, s_neg, mask, cnt = pair_loss(H, pos, neg, Q)
    P = len(pos)
    g_pos = (expit(s_pos) - 1.0) / P
    sn = expit(-s_neg)
    g_neg = Q * sn * (1.0 - sn) * mask / cnt[:, None] / P
    dH = np.zeros_like(H)
    a, b = pos[:, 0], pos[:, 1]
    np.add.at(dH, a, g_pos[:, None] * H[b] + np.einsum("pq,pqd->pd", g_neg, H[np.where(mask, neg, 0)]))
    np.add.at(dH, b, g_pos[:, None] * H[a])
    np.add.at(dH, np.where(mask, neg, 0).ravel(), (g_neg[..., None] * H[a][:, None, :]).reshape(-1, H.shape[1]))
    dpre = dH * (1.0 - H * H)
    grads = {
        "W_self": model.X.T @ dpre,
        "W_nbr": (A @ model.X).T @ dpre,
        "X": dpre @ model.W_self.T + A.T @ (dpre @ model.W_nbr.T),
    }
    return loss, grads


def draw_negatives(pos, weights, adj_keys, Q, rng, tries: int = 8):
    """Q draws from ``weights`` per pair, rejecting the anchor and its neighbors (-1 if none found).

    ``adj_keys`` holds sorted ``u * n + v`` codes of both edge directions.
    """
    n = len(weights)
    P = len(pos)
    neg = np.full((P, Q), -1, dtype=np.int64)
    if P == 0 or Q == 0:
        return neg
    p = weights / weights.sum()
    anchors = pos[:, 0]
    for _ in range(tries):
        todo = np.nonzero(neg < 0)
        if len(todo[0]) == 0:
            break
        cand = rng.choice(n, size=len(todo[0]), p=p)
        a = anchors[todo[0]]
        ok = (cand != a) & ~_contains(adj_keys, a * n + cand)
        neg[todo[0][ok], todo[1][ok]] = cand[ok]
    return neg


def _contains(sorted_keys, q):
    if len(sorted_keys) == 0:
        return np.zeros(len(q), dtype=bool)
    i = np.minimum(np.searchsorted(sorted_keys, q), len(sorted_keys) - 1)
    return sorted_keys[i] == q


def _adjacency_keys(gs: StaticGraph):
    pos = _positive_pairs(gs)
    return np.sort(pos[:, 0] * gs.num_nodes + pos[:, 1])


def _positive_pairs(gs: StaticGraph):
    e = gs.edge_array()
    if len(e) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate([e, e[:, ::-1]]).astype(np.int64)


def init_model(n: int, d: int, rng) -> SageModel:
    X = rng.normal(0.0, 1.0 / np.sqrt(d), (n, d))
    return SageModel(X, np.eye(d) + rng.normal(0, 0.1 / np.sqrt(d), (d, d)),
                     rng.normal(0, 0.1 / np.sqrt(d), (d, d)))


def train_sage(gs: StaticGraph, model: SageModel, weights, Q: int, epochs: int, lr: float, rng):
    A = mean_adjacency(gs)
    pos = _positive_pairs(gs)
    keys = _adjacency_keys(gs)
    params = model.params()
    opt = Adam(params, lr=lr)
    history = []
    if len(pos) == 0:
        return history
    for _ in range(epochs):
        neg = draw_negatives(pos, weights, keys, Q, rng)
        loss, grads = _loss_grad(model, A, pos, neg, Q)
        opt.step(params, grads)
        history.append(loss)
    return history


def false_positive_pairs(H, gs: StaticGraph, threshold: float = 0.5, chunk: int = 2048):
    """Non-adjacent pairs ``(u < v)`` whose edge probability exceeds ``threshold``."""
    n = len(H)
    keys = _adjacency_keys(gs)
    out = []
    for a in range(0, n, chunk):
        S = expit(H[a:a + chunk] @ H.T)
        rows, cols = np.nonzero(S > threshold)
        rows = rows + a
        ok = (rows < cols) & ~_contains(keys, rows * n + cols)
        out.extend(zip(rows[ok].tolist(), cols[ok].tolist()))
    return out


def boost_negatives(table, gs: StaticGraph, weights, threshold: float = 0.5):
    """Double the negative-sampling weight of every node in a false-positive pair.

    Returns ``(new_weights, n_false_positives)``; weights are unchanged when
    there are no false positives.
    """
    weights = np.asarray(weights, dtype=np.float64).copy()
    fp = false_positive_pairs(np.asarray(table), gs, threshold)
    if fp:
        hit = np.unique(np.asarray(fp).ravel())
        weights[hit] *= 2.0
    return weights, len(fp)


@dataclass
class SageResult:
    table: np.ndarray
    weights: np.ndarray
    loss: list
    false_positives: list


def sage_embed(gs: StaticGraph, d: int = 128, Q: int = 5, epochs: int = 200, seed: int = 0,
               lr: float = 0.01, boost_rounds: int = 0, threshold: float = 0.5,
               fp_target: int = 0) -> SageResult:
    """Train embeddings; optionally follow with boosting rounds (each retrains ``epochs // 2``)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 4]))
    model = init_model(gs.num_nodes, d, rng)
    weights = np.ones(gs.num_nodes)
    loss = train_sage(gs, model, weights, Q, epochs, lr, rng)
    A = mean_adjacency(gs)
    fps = []
    for _ in range(boost_rounds):
        weights, n_fp = boost_negatives(embed_forward(model, A), gs, weights, threshold)
        fps.append(n_fp)
        if n_fp <= fp_target:
            break
        loss += train_sage(gs, model, weights, Q, max(1, epochs // 2), lr, rng)
    if boost_rounds:
        fps.append(len(false_positive_pairs(embed_forward(model, A), gs, threshold)))
    return SageResult(embed_forward(model, A), weights, loss, fps)
