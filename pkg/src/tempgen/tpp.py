"""Intensity-free temporal point process: a log-normal mixture over gaps.

For features ``x`` (node representation concatenated with the recurrent
output) a head with weights ``W_mu, W_sigma, W_phi`` (each ``C x d``)
gives per-component log-space means, scales and mixture weights:

    mu = W_mu x,  sigma = exp(W_sigma x),  phi = softmax(W_phi x)

and the gap density is ``sum_c phi_c LogNormal(dt; mu_c, sigma_c)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, logsumexp, ndtr

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SIGMA_RAW_CLIP = 10.0
MIN_DT = 1e-6


@dataclass(frozen=True)
class MixtureParams:
    mu: np.ndarray
    sigma: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        mu, sigma, phi = (np.asarray(a, dtype=np.float64) for a in (self.mu, self.sigma, self.phi))
        if not (mu.shape == sigma.shape == phi.shape) or mu.ndim != 1:
            raise ValueError("mu, sigma, phi must be 1-D arrays of equal length")
        if np.any(sigma <= 0):
            raise ValueError("sigma must be strictly positive")
        if np.any(phi < 0) or abs(phi.sum() - 1.0) > 1e-9:
            raise ValueError("phi must be a probability vector")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "phi", phi)

    @property
    def n_components(self) -> int:
        return len(self.mu)

    def mean(self) -> float:
        return float(np.sum(self.phi * np.exp(self.mu + 0.5 * self.sigma ** 2)))

    def cdf(self, x):
        """Mixture CDF at ``x`` (scalar or array, ``x > 0``)."""
        x = np.asarray(x, dtype=np.float64)
        z = (np.log(x)[..., None] - self.mu) / self.sigma
        return ndtr(z) @ self.phi


@dataclass
class MixtureHead:
    W_mu: np.ndarray
    W_sigma: np.ndarray
    W_phi: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(self.W_mu), np.shape(self.W_sigma), np.shape(self.W_phi)}
        if len(shapes) != 1 or np.ndim(self.W_mu) != 2:
            raise ValueError("head weights must share one (C, d) shape")

    @classmethod
    def zeros(cls, n_components: int, dim: int) -> "MixtureHead":
        return cls(*(np.zeros((n_components, dim)) for _ in range(3)))

    @property
    def n_components(self) -> int:
        return self.W_mu.shape[0]


def mixture_params(head: MixtureHead, node_feat, o) -> MixtureParams:
    x = np.concatenate([np.ravel(node_feat), np.ravel(o)]).astype(np.float64)
    if x.shape[0] != head.W_mu.shape[1]:
        raise ValueError(f"feature size {x.shape[0]} does not match head width {head.W_mu.shape[1]}")
    mu = head.W_mu @ x
    sigma = np.exp(np.clip(head.W_sigma @ x, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP))
    phi = np.exp(log_softmax(head.W_phi @ x))
    return MixtureParams(mu, sigma, phi)


def component_log_density(mu, log_sigma, log_phi, dt):
    """Per-component ``log(phi_c * LogNormal(dt; mu_c, sigma_c))``, broadcasting."""
    y = np.log(dt)[..., None]
    zsq = ((y - mu) * np.exp(-log_sigma)) ** 2
    return log_phi - y - log_sigma - LOG_SQRT_2PI - 0.5 * zsq


def log_prob(p: MixtureParams, dt: float) -> float:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    comps = component_log_density(p.mu, np.log(p.sigma), np.log(p.phi), np.float64(dt))
    return float(logsumexp(comps))


def sample_dt(p: MixtureParams, rng: np.random.Generator) -> float:
    c = rng.choice(p.n_components, p=p.phi)
    eps = rng.standard_normal()
    return float(np.exp(p.sigma[c] * eps + p.mu[c]))


# ---------------------------------------------------------------------------
# batched forms used by the recurrent models


def head_forward(X, W_mu, W_sigma, W_phi):
    """Raw head outputs for a batch of feature rows ``X`` (B, d)."""
    mu = X @ W_mu.T
    s_raw = X @ W_sigma.T
    log_sigma = np.clip(s_raw, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP)
    logits = X @ W_phi.T
    return mu, s_raw, log_sigma, logits


def mixture_nll(mu, s_raw, logits, dt):
    """Negative log-likelihood per row and its gradients.

    ``dt`` is clamped to ``MIN_DT``. Returns ``(nll, d_mu, d_s_raw,
    d_logits)``, gradients of ``nll`` (not its negation).
    """
    dt = np.maximum(np.asarray(dt, dtype=np.float64), MIN_DT)
    log_sigma = np.clip(s_raw, -SIGMA_RAW_CLIP, SIGMA_RAW_CLIP)
    log_phi = log_softmax(logits, axis=-1)
    comps = component_log_density(mu, log_sigma, log_phi, dt)
    ll = logsumexp(comps, axis=-1)
    r = np.exp(comps - ll[..., None])
    y = np.log(dt)[..., None]
    inv_var = np.exp(-2.0 * log_sigma)
    diff = y - mu
    d_mu = -r * diff * inv_var
    d_s = -r * (diff * diff * inv_var - 1.0)
    d_s = np.where(np.abs(s_raw) <= SIGMA_RAW_CLIP, d_s, 0.0)
    d_logits = -(r - np.exp(log_phi))
    return -ll, d_mu, d_s, d_logits


def sample_dt_batch(mu, log_sigma, logits, rng: np.random.Generator):
    """Draw one gap per row: component from softmax(logits), then log-normal."""
    phi = np.exp(log_softmax(logits, axis=-1))
    u = rng.random(len(mu))
    c = (np.cumsum(phi, axis=-1) < u[:, None]).sum(axis=-1)
    c = np.minimum(c, mu.shape[-1] - 1)
    eps = rng.standard_normal(len(mu))
    rows = np.arange(len(mu))
    return np.exp(np.exp(log_sigma[rows, c]) * eps + mu[rows, c])
