"""Small numpy layers with explicit backward passes.

Parameters live in plain ``dict[str, ndarray]`` containers; every backward
function returns gradients in a dict with the same keys, which keeps the
finite-difference checker generic.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit


def uniform_init(rng: np.random.Generator, shape, scale: float) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


# ---------------------------------------------------------------- Time2Vec

def time2vec(omega, zeta, t):
    """Linear component at index 0, sinusoids after. ``t`` may be any shape."""
    t = np.asarray(t, dtype=np.float64)
    z = t[..., None] * omega + zeta
    out = np.sin(z)
    out[..., 0] = z[..., 0]
    return out


def time2vec_init_freq(rng, dim: int, lo: float = 0.5, hi: float = 50.0):
    """Initial frequencies for time scaled to [0, 1]: a linear slope, then
    sinusoids log-spaced from ``lo`` to ``hi`` cycles over the range."""
    cycles = np.geomspace(lo, hi, dim - 1) if dim > 1 else np.zeros(0)
    return np.r_[rng.normal(0.0, 1.0), 2 * np.pi * cycles]


def time2vec_backward(omega, zeta, t, d_out):
    t = np.asarray(t, dtype=np.float64)
    z = t[..., None] * omega + zeta
    dz = d_out * np.cos(z)
    dz[..., 0] = d_out[..., 0]
    axes = tuple(range(dz.ndim - 1))
    return (dz * t[..., None]).sum(axis=axes), dz.sum(axis=axes)


# -------------------------------------------------------------------- LSTM

def lstm_init(rng, n_in: int, n_hidden: int, prefix: str) -> dict:
    scale = 1.0 / np.sqrt(n_hidden)
    b = np.zeros(4 * n_hidden)
    b[n_hidden:2 * n_hidden] = 1.0  # forget gate
    return {f"{prefix}W": uniform_init(rng, (n_in + n_hidden, 4 * n_hidden), scale),
            f"{prefix}b": b}


def lstm_step(x, h, c, W, b):
    H = h.shape[-1]
    z = np.concatenate([x, h], axis=-1) @ W + b
    i = expit(z[..., :H])
    f = expit(z[..., H:2 * H])
    o = expit(z[..., 2 * H:3 * H])
    g = np.tanh(z[..., 3 * H:])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    return o * tc, c_new, (i, f, o, g, tc)


def lstm_forward(X, W, b):
    """Run one layer over a (B, L, I) sequence from a zero state."""
    B, L, _ = X.shape
    H = b.shape[0] // 4
    dtype = np.result_type(X, W)
    h = np.zeros((B, H), dtype=dtype)
    c = np.zeros((B, H), dtype=dtype)
    hs = np.empty((B, L, H), dtype=dtype)
    cache = []
    for s in range(L):
        h_prev, c_prev = h, c
        h, c, gates = lstm_step(X[:, s], h_prev, c_prev, W, b)
        hs[:, s] = h
        cache.append((h_prev, c_prev, gates))
    return hs, cache


def lstm_backward(dHs, X, W, cache):
    B, L, I = X.shape
    H = dHs.shape[-1]
    dX = np.empty_like(X)
    dW = np.zeros_like(W)
    db = np.zeros(4 * H)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for s in range(L - 1, -1, -1):
        h_prev, c_prev, (i, f, o, g, tc) = cache[s]
        dh = dHs[:, s] + dh_next
        do = dh * tc
        dc = dh * o * (1.0 - tc * tc) + dc_next
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dz = np.concatenate([di * i * (1 - i), df * f * (1 - f), do * o * (1 - o), dg * (1 - g * g)], axis=-1)
        xh = np.concatenate([X[:, s], h_prev], axis=-1)
        dW += xh.T @ dz
        db += dz.sum(axis=0)
        dxh = dz @ W.T
        dX[:, s] = dxh[:, :I]
        dh_next = dxh[:, I:]
    return dX, dW, db


class StackedLSTM:
    """Two (or more) LSTM layers; the top layer's hidden state is the output."""

    def __init__(self, n_layers: int = 2):
        self.n_layers = n_layers

    @staticmethod
    def init(rng, n_in, n_hidden, n_layers=2) -> dict:
        params = {}
        for k in range(n_layers):
            params.update(lstm_init(rng, n_in if k == 0 else n_hidden, n_hidden, f"lstm{k}_"))
        return params

    def forward(self, params, X):
        caches = []
        h = X
        for k in range(self.n_layers):
            out, cache = lstm_forward(h, params[f"lstm{k}_W"], params[f"lstm{k}_b"])
            caches.append((h, cache))
            h = out
        return h, caches

    def backward(self, params, dOut, caches, grads):
        d = dOut
        for k in range(self.n_layers - 1, -1, -1):
            X, cache = caches[k]
            d, dW, db = lstm_backward(d, X, params[f"lstm{k}_W"], cache)
            grads[f"lstm{k}_W"] += dW
            grads[f"lstm{k}_b"] += db
        return d

    def zero_state(self, params, batch: int):
        b = params["lstm0_b"]
        H = b.shape[0] // 4
        return [(np.zeros((batch, H), b.dtype), np.zeros((batch, H), b.dtype)) for _ in range(self.n_layers)]

    def step(self, params, x, state):
        new = []
        h = x
        for k in range(self.n_layers):
            hk, ck = state[k]
            hk, ck, _ = lstm_step(h, hk, ck, params[f"lstm{k}_W"], params[f"lstm{k}_b"])
            new.append((hk, ck))
            h = hk
        return h, new


# --------------------------------------------------------------- optimizers

def clip_grad_norm(grads: dict, max_norm: float | None) -> float:
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if max_norm and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for g in grads.values():
            g *= scale
    return total


class Adam:
    def __init__(self, params: dict, lr: float = 1e-3, betas=(0.9, 0.999), eps: float = 1e-8,
                 frozen: tuple[str, ...] = ()):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.frozen = set(frozen)
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1 - self.b1 ** self.t
        c2 = 1 - self.b2 ** self.t
        for k, g in grads.items():
            if k in self.frozen:
                continue
            m = self.m[k]
            v = self.v[k]
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class RMSProp:
    def __init__(self, params: dict, lr: float = 5e-5, alpha: float = 0.99, eps: float = 1e-8):
        self.lr = lr
        self.alpha = alpha
        self.eps = eps
        self.sq = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        for k, g in grads.items():
            s = self.sq[k]
            s *= self.alpha
            s += (1 - self.alpha) * g * g
            params[k] -= self.lr * g / (np.sqrt(s) + self.eps)


# ---------------------------------------------------------- gradient check

def finite_difference_check(loss_fn, params: dict, grads: dict, step: float = 1e-5,
                            floor: float = 1e-6, keys=None) -> dict:
    """Compare analytic ``grads`` against central differences of ``loss_fn()``.

    ``loss_fn`` takes no arguments and reads ``params`` (mutated in place
    and restored). ``params`` may be an extended-precision copy of the
    parameters the analytic gradients were computed at; that keeps the
    oracle's rounding noise far below the tolerance. Returns
    ``{name: max relative error}`` where the error of one entry is
    ``|a - n| / max(|a|, |n|, floor)``.
    """
    out = {}
    for name in (keys or params):
        p = params[name]
        g = grads[name]
        worst = 0.0
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            old = flat[j]
            flat[j] = old + step
            up = loss_fn()
            flat[j] = old - step
            down = loss_fn()
            flat[j] = old
            num = float((up - down) / (2 * step))
            err = abs(float(gflat[j]) - num) / max(abs(float(gflat[j])), abs(num), floor)
            worst = max(worst, err)
        out[name] = worst
    return out
