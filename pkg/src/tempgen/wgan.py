"""Weight-clipped Wasserstein GAN over node embeddings (3-layer MLPs)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .nn import RMSProp


def mlp_init(rng, sizes, prefix: str) -> dict:
    p = {}
    for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        p[f"{prefix}W{i}"] = rng.normal(0.0, math.sqrt(2.0 / a), (a, b))
        p[f"{prefix}b{i}"] = np.zeros(b)
    return p


def mlp_forward(p: dict, prefix: str, x, n_layers: int = 3):
    acts = [x]
    h = x
    for i in range(n_layers):
        h = h @ p[f"{prefix}W{i}"] + p[f"{prefix}b{i}"]
        if i < n_layers - 1:
            h = np.maximum(h, 0.0)
        acts.append(h)
    return h, acts


def mlp_backward(p: dict, prefix: str, acts, dout, n_layers: int = 3):
    grads = {}
    d = dout
    for i in range(n_layers - 1, -1, -1):
        if i < n_layers - 1:
            d = d * (acts[i + 1] > 0)
        grads[f"{prefix}W{i}"] = acts[i].T @ d
        grads[f"{prefix}b{i}"] = d.sum(axis=0)
        d = d @ p[f"{prefix}W{i}"].T
    return grads, d


@dataclass
class WganPair:
    gen: dict
    critic: dict
    noise_dim: int
    clip: float
    history: list = field(default_factory=list)  # (critic_loss, generator_loss) per round

    @property
    def dim(self) -> int:
        return self.gen["gW2"].shape[1]

    def generate(self, noise):
        return mlp_forward(self.gen, "g", noise)[0]

    def critic_score(self, x):
        return mlp_forward(self.critic, "c", x)[0][:, 0]


def unique_rows(X) -> np.ndarray:
    return np.unique(np.asarray(X, dtype=np.float64), axis=0)


def wgan_train(embeddings, epochs: int = 200, clip: float = 0.01, seed: int = 0, lr: float = 5e-4,
               batch_size: int = 64, hidden: int = 128, noise_dim: int = 64,
               critic_epochs: int = 4) -> WganPair:
    """Alternate ``critic_epochs`` critic passes with one generator pass, ``epochs`` times."""
    X = unique_rows(embeddings)
    if len(X) < 2:
        raise ValueError("need at least 2 distinct embeddings")
    d = X.shape[1]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 6]))
    gen = mlp_init(rng, [noise_dim, hidden, hidden, d], "g")
    critic = mlp_init(rng, [d, hidden, hidden, 1], "c")
    for k, v in critic.items():
        np.clip(v, -clip, clip, out=v)
    pair = WganPair(gen, critic, noise_dim, clip)
    opt_c = RMSProp(critic, lr=lr)
    opt_g = RMSProp(gen, lr=lr)
    n = len(X)
    bs = min(batch_size, n)
    n_batches = math.ceil(n / bs)
    for _ in range(epochs):
        c_losses = []
        for _ in range(critic_epochs):
            order = rng.permutation(n)
            for b in range(n_batches):
                real = X[order[b * bs:(b + 1) * bs]]
                fake = pair.generate(rng.standard_normal((len(real), noise_dim)))
                sr, ar = mlp_forward(critic, "c", real)
                sf, af = mlp_forward(critic, "c", fake)
                c_losses.append(float(sf.mean() - sr.mean()))
                gr, _ = mlp_backward(critic, "c", ar, -np.ones_like(sr) / len(real))
                gf, _ = mlp_backward(critic, "c", af, np.ones_like(sf) / len(fake))
                opt_c.step(critic, {k: gr[k] + gf[k] for k in gr})
                for v in critic.values():
                    np.clip(v, -clip, clip, out=v)
        g_losses = []
        for b in range(n_batches):
            z = rng.standard_normal((bs, noise_dim))
            fake, ag = mlp_forward(gen, "g", z)
            sf, af = mlp_forward(critic, "c", fake)
            g_losses.append(float(-sf.mean()))
            _, dfake = mlp_backward(critic, "c", af, -np.ones_like(sf) / bs)
            gg, _ = mlp_backward(gen, "g", ag, dfake)
            opt_g.step(gen, gg)
        cl, gl = float(np.mean(c_losses)), float(np.mean(g_losses))
        if not (math.isfinite(cl) and math.isfinite(gl)):
            raise FloatingPointError("WGAN training diverged (non-finite loss)")
        pair.history.append((cl, gl))
    return pair


def wgan_sample(pair: WganPair, count: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return np.zeros((0, pair.dim))
    return pair.generate(rng.standard_normal((count, pair.noise_dim)))
