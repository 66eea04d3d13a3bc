import math

import numpy as np
import pytest
from scipy import integrate, stats

from phsmc.survival.laplace import (
    ImproperLeafError,
    is_proper,
    leaf_d1,
    leaf_d2,
    leaf_eta_hat,
    leaf_log_evidence,
    leaf_log_integrand,
    leaf_stats,
    truncated_d2,
)


def _leaf(seed, n=25, shape=1.7, scale=10.0, censor=0.25):
    rng = np.random.default_rng(seed)
    t = scale * rng.weibull(shape, n)
    e = (rng.uniform(size=n) > censor).astype(int)
    return t, e


def _fd(f, x, h=1e-4):
    return (f(x + h) - f(x - h)) / (2 * h), (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("eta", [-1.0, 0.3, 1.2])
def test_derivatives_match_finite_differences(seed, eta):
    s = leaf_stats(*_leaf(seed))
    g, h = _fd(lambda e: leaf_log_integrand(s, e), eta)
    assert leaf_d1(s, eta) == pytest.approx(g, rel=1e-5, abs=1e-5)
    assert leaf_d2(s, eta) == pytest.approx(h, rel=1e-4, abs=1e-4)


def test_truncated_curvature_is_not_the_second_derivative():
    s = leaf_stats(*_leaf(3))
    _, h = _fd(lambda e: leaf_log_integrand(s, e), 0.5)
    assert abs(truncated_d2(s, 0.5) - h) > 0.05 * abs(h)


def test_eta_hat_is_weibull_shape_mle():
    rng = np.random.default_rng(11)
    t = 5.0 * rng.weibull(2.2, 200)
    s = leaf_stats(t, np.ones(200))
    eta, h = leaf_eta_hat(s)
    shape, _, _ = stats.weibull_min.fit(t, floc=0)
    assert math.exp(eta) == pytest.approx(shape, rel=1e-4)
    assert abs(leaf_d1(s, eta)) < 1e-8 and h < 0


def test_forms_differ_by_leaf_constant():
    s = leaf_stats(*_leaf(4))
    for eta in (-0.5, 0.0, 0.9):
        diff = leaf_log_integrand(s, eta, "exact") - leaf_log_integrand(s, eta, "shifted")
        assert diff == pytest.approx(s.d - s.sum_log_t)
    with pytest.raises(ValueError):
        leaf_log_integrand(s, 0.0, "other")


@pytest.mark.parametrize("seed", range(5))
def test_laplace_close_to_quadrature(seed):
    s = leaf_stats(*_leaf(seed, n=40, censor=0.0))
    eta, _ = leaf_eta_hat(s)
    top = leaf_log_integrand(s, eta)
    val, _ = integrate.quad(lambda e: math.exp(leaf_log_integrand(s, e) - top), eta - 6, eta + 6, points=[eta])
    assert abs(leaf_log_evidence(s) - (top + math.log(val))) < 0.05


def test_exact_form_integrates_to_two_dimensional_evidence():
    t = np.array([0.8, 1.9, 2.4, 3.1, 4.7])
    e = np.array([1, 1, 0, 1, 1])
    s = leaf_stats(t, e)
    te = t[e == 1]
    d, sum_log = len(te), np.log(te).sum()

    # Weibull likelihood (rate beta) times 1/(alpha beta), in log coordinates
    def g(v, u):
        a = math.exp(u)
        return d * (u + v) + (a - 1) * sum_log - math.exp(v) * np.sum(t**a)

    top = g(math.log(d / np.sum(t**1.5)), math.log(1.5))
    val, _ = integrate.dblquad(lambda v, u: math.exp(g(v, u) - top), -5, 5, -60, 20, epsabs=1e-12, epsrel=1e-10)
    two_d = top + math.log(val)
    one_d = math.log(integrate.quad(lambda x: math.exp(leaf_log_integrand(s, x)), -10, 10, limit=400, epsrel=1e-12)[0])
    assert one_d == pytest.approx(two_d, abs=1e-6)
    shifted = math.log(integrate.quad(lambda x: math.exp(leaf_log_integrand(s, x, "shifted")), -10, 10, limit=400)[0])
    assert abs(shifted - two_d) > 0.5


def test_propriety():
    assert not is_proper(leaf_stats([1.0, 2.0, 3.0], [1, 0, 0]))
    assert not is_proper(leaf_stats([2.0, 2.0, 3.0], [1, 1, 0]))
    assert is_proper(leaf_stats([2.0, 2.5], [1, 1]))
    with pytest.raises(ImproperLeafError):
        leaf_log_evidence(leaf_stats([2.0, 2.0], [1, 1]))
