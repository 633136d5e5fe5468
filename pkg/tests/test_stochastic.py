import math

import numpy as np
import pytest
from scipy import stats

from reflexcycle import params as P
from reflexcycle.stochastic import (ProductivityState, ShockStreams, ar1_update, draw_risk, risk_mean,
                                    risk_variance, step_productivity)


def test_ar1_examples(base):
    p0 = P.with_overrides(base, {"eta": 0.0, "sigma_z": 1.0})
    assert step_productivity(ProductivityState(5.0, 0.0), p0, eps=0.1).frak_z == pytest.approx(0.1)
    p = P.with_overrides(base, {"sigma_z": 1.0})
    s = step_productivity(ProductivityState(0.2, 0.0), p, eps=0.1)
    assert s.frak_z == pytest.approx(0.18660, abs=1e-5)
    assert s.z == pytest.approx(base.z0 * math.exp(s.frak_z))


def _ar1_series(eta, sigma, n, seed=3):
    eps = ShockStreams.from_seed(seed).normals(n)
    x = np.empty(n)
    f = 0.0
    for i in range(n):
        f = ar1_update(f, eta, sigma, eps[i])
        x[i] = f
    return x


@pytest.mark.parametrize("eta", [0.0, 0.5, 0.9])
def test_stationary_variance_and_autocorrelation(eta):
    x = _ar1_series(eta, 0.15, 1_000_000)[1000:]
    assert np.var(x) == pytest.approx(0.15 ** 2, rel=0.02)
    assert np.corrcoef(x[1:], x[:-1])[0, 1] == pytest.approx(eta, abs=0.02)


def test_risk_moments_and_ks(base):
    xi = np.array([draw_risk(base, u=u) for u in ShockStreams.from_seed(1).uniforms(1000)])
    assert np.all((xi > 0) & (xi <= 1))
    u = ShockStreams.from_seed(2).uniforms(1_000_000)
    xi = u ** (1 / 15)
    assert xi.mean() == pytest.approx(0.9375, abs=1e-3)
    assert xi.var() == pytest.approx(15 / (17 * 256), rel=0.05)
    assert risk_mean(15) == 0.9375 and risk_variance(15) == pytest.approx(15 / (17 * 256))
    ks = stats.kstest(xi[:100_000], lambda x: np.clip(x, 0, 1) ** 15)
    assert ks.pvalue > 0.01


def test_risk_endpoints(base):
    assert draw_risk(base, u=1.0) == 1.0
    assert draw_risk(P.with_overrides(base, {"a": math.inf}), u=0.3) == 1.0


def test_streams_reproducible_and_independent():
    a, b = ShockStreams.from_seed(7), ShockStreams.from_seed(7)
    assert np.array_equal(a.normals(100), b.normals(100))
    # drawing from one stream leaves the other untouched
    c, d = ShockStreams.from_seed(7), ShockStreams.from_seed(7)
    c.normals(500)
    assert np.array_equal(c.uniforms(10), d.uniforms(10))
    # bulk draws equal sequential scalar draws
    e, f = ShockStreams.from_seed(7), ShockStreams.from_seed(7)
    assert np.array_equal(e.normals(5), np.concatenate([f.normals(1) for _ in range(5)]))


def test_stream_keys_distinct():
    base = ShockStreams.from_seed(0).normals(4)
    for other in (ShockStreams.from_seed(1), ShockStreams.from_seed(0, (1,)), ShockStreams.from_seed(0, replica=1)):
        assert not np.array_equal(base, other.normals(4))
    assert not np.array_equal(ShockStreams.from_seed(0).normals(4), ShockStreams.from_seed(0).uniforms(4))


def test_uniforms_in_half_open_interval():
    u = ShockStreams.from_seed(5).uniforms(100_000)
    assert u.min() > 0 and u.max() <= 1
