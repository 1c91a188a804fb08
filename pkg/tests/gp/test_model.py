"""Tests for GP conditioning, sampling and the marginal likelihood."""

import numpy as np
import pytest

from gpmem.core.errors import ConfigError, DataError
from gpmem.gp.linalg import jittered_cholesky
from gpmem.gp.model import (
    GPModel,
    log_likelihood,
    log_likelihood_gradient,
    posterior,
    predictive_bands,
    sample_joint,
)
from gpmem.kernels.params import HyperParams
from gpmem.kernels.text import parse_kernel


@pytest.fixture
def model():
    params = HyperParams.build(
        [
            ("sf", 1.3, "hyper", None),
            ("l", 0.7, "hyper", None),
            ("s", 0.4, "hyper", None),
            ("sigma", 0.2, "noise", None),
        ]
    )
    return GPModel(parse_kernel("SE(sf, l) + LIN(s) + WN(sigma)"), params)


@pytest.fixture
def data(rng):
    xs = rng.uniform(-2, 2, 15)
    return xs, np.sin(2 * xs) + 0.1 * rng.standard_normal(15)


def _dense_log_likelihood(model, xs, ys):
    K = model.gram(xs)
    jitter = jittered_cholesky(K).jitter
    Kj = K + jitter * np.eye(xs.size)
    _, logdet = np.linalg.slogdet(Kj)
    return -0.5 * ys @ np.linalg.solve(Kj, ys) - 0.5 * logdet - 0.5 * xs.size * np.log(2 * np.pi)


class TestGPModel:
    def test_unknown_parameter(self):
        params = HyperParams.build([("sf", 1.0, "hyper", None)])
        with pytest.raises(ConfigError, match="unresolved kernel parameter 'l'"):
            GPModel(parse_kernel("SE(sf, l)"), params)


class TestLogLikelihood:
    def test_matches_dense_formula(self, model, data):
        xs, ys = data
        assert log_likelihood(model, xs, ys) == pytest.approx(
            _dense_log_likelihood(model, xs, ys), rel=1e-8
        )

    def test_single_point(self, model):
        var = float(model.gram([0.5])[0, 0])
        expected = -0.5 * 0.3**2 / var - 0.5 * np.log(var) - 0.5 * np.log(2 * np.pi)
        assert log_likelihood(model, [0.5], [0.3]) == pytest.approx(expected, rel=1e-6)

    def test_rejects_empty(self, model):
        with pytest.raises(DataError):
            log_likelihood(model, [], [])

    def test_rejects_mismatched_lengths(self, model):
        with pytest.raises(DataError, match="differ in length"):
            log_likelihood(model, [0.0, 1.0], [0.0])


class TestGradient:
    def test_matches_finite_differences(self, model, data):
        xs, ys = data
        grads = log_likelihood_gradient(model, xs, ys)
        assert set(grads) == {"sf", "l", "s", "sigma"}
        for name, value in grads.items():
            h = 1e-6 * model.params[name]
            up = GPModel(model.kernel, model.params.with_value(name, model.params[name] + h))
            down = GPModel(model.kernel, model.params.with_value(name, model.params[name] - h))
            fd = (log_likelihood(up, xs, ys) - log_likelihood(down, xs, ys)) / (2 * h)
            assert value == pytest.approx(fd, rel=1e-4, abs=1e-5)

    def test_unused_names_are_zero(self, model, data):
        xs, ys = data
        assert log_likelihood_gradient(model, xs, ys, names=["sf", "other"])["other"] == 0.0


class TestPosterior:
    def test_prior_without_data(self, model):
        post = posterior(model, [], [], [0.0, 1.0])
        np.testing.assert_array_equal(post.mean, np.zeros(2))
        np.testing.assert_allclose(post.cov, model.gram([0.0, 1.0]))

    def test_matches_dense_formula(self, model, data):
        xs, ys = data
        xq = np.linspace(-2, 2, 9)
        post = posterior(model, xs, ys, xq)
        K = model.gram(xs)
        Kj = K + jittered_cholesky(K).jitter * np.eye(xs.size)
        K_xq = model.gram(xs, xq)
        np.testing.assert_allclose(post.mean, K_xq.T @ np.linalg.solve(Kj, ys), rtol=1e-8)
        expected_cov = model.gram(xq) - K_xq.T @ np.linalg.solve(Kj, K_xq)
        np.testing.assert_allclose(post.cov, expected_cov, rtol=1e-6, atol=1e-10)

    def test_interpolates_noise_free_data(self):
        params = HyperParams.build([("sf", 1.0, "hyper", None), ("l", 1.0, "hyper", None)])
        model = GPModel(parse_kernel("SE(sf, l)"), params)
        xs = np.array([-1.0, 0.0, 1.5])
        ys = np.array([0.3, -0.2, 0.8])
        post = posterior(model, xs, ys, xs)
        np.testing.assert_allclose(post.mean, ys, atol=1e-5)
        assert np.all(post.sd < 1e-3)

    def test_bands(self, model, data):
        xs, ys = data
        post = posterior(model, xs, ys, [0.0, 3.0])
        lo, hi = predictive_bands(post)
        np.testing.assert_allclose(hi - lo, 4.0 * post.sd)

    def test_rejects_empty_query(self, model):
        with pytest.raises(DataError):
            posterior(model, [0.0], [1.0], [])


class TestSampleJoint:
    def test_moments(self, model, data, rng):
        xs, ys = data
        post = posterior(model, xs, ys, [-1.0, 0.25, 3.5])
        draws = np.array([sample_joint(post, rng) for _ in range(4000)])
        np.testing.assert_allclose(draws.mean(axis=0), post.mean, atol=4 * post.sd.max() / 60)
        np.testing.assert_allclose(np.cov(draws.T), post.cov, atol=0.15 * post.cov.max())

    def test_reproducible(self, model):
        post = posterior(model, [], [], np.linspace(0, 1, 5))
        a = sample_joint(post, np.random.default_rng(3))
        b = sample_joint(post, np.random.default_rng(3))
        np.testing.assert_array_equal(a, b)
