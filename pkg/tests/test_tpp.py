import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from tempgen import tpp
from tempgen.nn import finite_difference_check


def random_params(rng, C=None):
    C = C or int(rng.integers(1, 6))
    return tpp.MixtureParams(rng.normal(0, 1, C), np.exp(rng.uniform(-1, 0.7, C)), rng.dirichlet(np.ones(C)))


def density_integral(p):
    # integrate in log space: int f(x) dx = int f(e^y) e^y dy
    f = lambda y: np.exp(tpp.log_prob(p, np.exp(y)) + y)
    lo = float((p.mu - 12 * p.sigma).min())
    hi = float((p.mu + 12 * p.sigma).max())
    return integrate.quad(f, lo, hi, limit=400, points=sorted(p.mu.tolist()))[0]


def test_density_integrates_to_one():
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert abs(density_integral(random_params(rng)) - 1.0) < 1e-3


def test_sampler_matches_cdf():
    rng = np.random.default_rng(1)
    p = random_params(rng, 3)
    x = np.array([tpp.sample_dt(p, rng) for _ in range(20_000)])
    assert stats.kstest(x, p.cdf).pvalue > 1e-3


def test_batched_sampler_matches_cdf():
    rng = np.random.default_rng(2)
    p = random_params(rng, 4)
    n = 50_000
    mu = np.tile(p.mu, (n, 1))
    x = tpp.sample_dt_batch(mu, np.log(np.tile(p.sigma, (n, 1))), np.log(np.tile(p.phi, (n, 1))), rng)
    assert stats.kstest(x, p.cdf).pvalue > 1e-3


def test_single_component_is_lognormal():
    p = tpp.MixtureParams([0.3], [0.7], [1.0])
    ref = stats.lognorm(s=0.7, scale=np.exp(0.3))
    for dt in (0.1, 1.0, 4.0):
        assert tpp.log_prob(p, dt) == pytest.approx(ref.logpdf(dt), rel=1e-12)
    assert p.mean() == pytest.approx(ref.mean(), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_batched_nll_matches_scalar(C, seed):
    rng = np.random.default_rng(seed)
    mu, s_raw, logits = rng.normal(size=(3, 5, C))
    dt = rng.lognormal(size=5)
    nll = tpp.mixture_nll(mu, s_raw, logits, dt)[0]
    for i in range(5):
        p = tpp.MixtureParams(mu[i], np.exp(s_raw[i]), np.exp(logits[i] - np.logaddexp.reduce(logits[i])))
        assert nll[i] == pytest.approx(-tpp.log_prob(p, dt[i]), rel=1e-9, abs=1e-9)


def test_nll_gradients():
    rng = np.random.default_rng(3)
    P = {"mu": rng.normal(size=(4, 3)), "s": rng.normal(size=(4, 3)), "l": rng.normal(size=(4, 3))}
    dt = rng.lognormal(size=4)
    _, dm, ds, dl = tpp.mixture_nll(P["mu"], P["s"], P["l"], dt)
    ref = {k: v.astype(np.longdouble) for k, v in P.items()}
    err = finite_difference_check(lambda: tpp.mixture_nll(ref["mu"], ref["s"], ref["l"], dt)[0].sum(),
                                  ref, {"mu": dm, "s": ds, "l": dl})
    assert max(err.values()) < 1e-6


def test_invalid_params():
    with pytest.raises(ValueError):
        tpp.MixtureParams([0.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        tpp.MixtureParams([0.0, 1.0], [1.0, 1.0], [0.3, 0.3])
    with pytest.raises(ValueError):
        tpp.log_prob(tpp.MixtureParams([0.0], [1.0], [1.0]), 0.0)


def test_head_shape_mismatch():
    head = tpp.MixtureHead.zeros(3, 4)
    with pytest.raises(ValueError):
        tpp.mixture_params(head, np.zeros(2), np.zeros(3))
    p = tpp.mixture_params(head, np.zeros(2), np.zeros(2))
    assert np.allclose(p.phi, 1 / 3) and np.allclose(p.sigma, 1.0)
