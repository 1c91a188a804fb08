"""Tests for the base kernel formulas and expression evaluation."""

import math

import numpy as np
import pytest

from gpmem.core.errors import ConfigError, DataError, NumericError
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.evaluate import eval_kernel, gram_gradients, gram_matrix
from gpmem.kernels.expr import Base, params_of
from gpmem.kernels.registry import FORMULA_REGISTRY, get_formula
from gpmem.kernels.text import parse_kernel


class TestBaseFormulas:
    def test_se_at_zero_distance_is_variance(self):
        k = Base(BaseKernelKind.SE, ("sf", "l"))
        assert eval_kernel(k, {"sf": 2.0, "l": 1.0}, 0.3, 0.3) == pytest.approx(4.0)

    def test_se_decays_with_distance(self):
        k = Base(BaseKernelKind.SE, ("sf", "l"))
        value = eval_kernel(k, {"sf": 1.0, "l": 2.0}, 0.0, 2.0)
        assert value == pytest.approx(math.exp(-0.5))

    def test_linear(self):
        k = Base(BaseKernelKind.LIN, ("sf",))
        assert eval_kernel(k, {"sf": 3.0}, 2.0, -1.5) == pytest.approx(-27.0)

    def test_periodic_repeats_and_is_bounded(self):
        k = Base(BaseKernelKind.PER, ("sf", "p", "l"))
        params = {"sf": 1.5, "p": 2.0, "l": 0.7}
        assert eval_kernel(k, params, 0.0, 2.0) == pytest.approx(1.5**2)
        assert eval_kernel(k, params, 0.1, 4.1) == pytest.approx(1.5**2)
        xs = np.linspace(-5, 5, 41)
        assert np.all(gram_matrix(k, params, xs) <= 1.5**2 + 1e-12)

    def test_white_noise_uses_exact_equality(self):
        k = Base(BaseKernelKind.WN, ("sf",))
        K = gram_matrix(k, {"sf": 0.5}, [0.0, 1.0, 0.0])
        np.testing.assert_array_equal(K, 0.25 * np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]]))

    def test_constant(self):
        k = Base(BaseKernelKind.CONST, ("c",))
        K = gram_matrix(k, {"c": 2.0}, [0.0, 1.0], [5.0, 6.0, 7.0])
        assert K.shape == (2, 3)
        assert np.all(K == 4.0)

    def test_rational_quadratic_tends_to_se(self):
        rq = Base(BaseKernelKind.RQ, ("sf", "a", "l"))
        se = Base(BaseKernelKind.SE, ("sf", "l"))
        params = {"sf": 1.0, "a": 1e6, "l": 0.8}
        xs = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(
            gram_matrix(rq, params, xs), gram_matrix(se, params, xs), atol=1e-5
        )

    def test_every_kind_registered(self):
        get_formula("SE")
        assert set(FORMULA_REGISTRY) == set(BaseKernelKind)


class TestRegistryErrors:
    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="Unknown kernel"):
            get_formula("MATERN")

    def test_wrong_arity(self):
        with pytest.raises(ConfigError, match="takes 2"):
            Base(BaseKernelKind.SE, ("sf",))


class TestGramMatrix:
    def test_symmetric(self, rng):
        expr = parse_kernel("LIN(a) * SE(b, c) + PER(d, p, l)")
        params = {"a": 0.7, "b": 1.2, "c": 0.9, "d": 1.1, "p": 1.7, "l": 0.6}
        K = gram_matrix(expr, params, rng.uniform(-3, 3, 12))
        np.testing.assert_array_equal(K, K.T)

    def test_empty_inputs(self):
        with pytest.raises(DataError):
            gram_matrix(Base(BaseKernelKind.WN, ("s",)), {"s": 1.0}, [])

    def test_non_finite_values(self):
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(NumericError):
                gram_matrix(Base(BaseKernelKind.LIN, ("s",)), {"s": 1e100}, [1e200])

    def test_sum_and_product(self):
        expr = parse_kernel("SE(a, b) + LIN(c) * WN(d)")
        params = {"a": 1.0, "b": 1.0, "c": 2.0, "d": 0.5}
        xs = [0.0, 1.0]
        se = gram_matrix(parse_kernel("SE(a, b)"), params, xs)
        lin = gram_matrix(parse_kernel("LIN(c)"), params, xs)
        wn = gram_matrix(parse_kernel("WN(d)"), params, xs)
        np.testing.assert_allclose(gram_matrix(expr, params, xs), se + lin * wn)


@pytest.mark.parametrize(
    "text",
    [
        "SE(a, b)",
        "LIN(a)",
        "PER(a, p, l)",
        "RQ(a, al, l)",
        "CONST(a) * SE(b, c)",
        "LIN(a) * PER(b, p, l) + SE(c, d)",
        "SE(a, l) * SE(b, l)",
    ],
)
def test_gradients_match_finite_differences(text, rng):
    expr = parse_kernel(text)
    names = params_of(expr)
    params = {n: float(v) for n, v in zip(names, rng.uniform(0.6, 1.8, len(names)), strict=True)}
    xs = rng.uniform(-2, 2, 5)
    xs2 = rng.uniform(-2, 2, 4)
    _, grads = gram_gradients(expr, params, xs, xs2)
    for name in names:
        h = 1e-6 * params[name]
        up = gram_matrix(expr, {**params, name: params[name] + h}, xs, xs2)
        down = gram_matrix(expr, {**params, name: params[name] - h}, xs, xs2)
        np.testing.assert_allclose(grads[name], (up - down) / (2 * h), rtol=1e-5, atol=1e-7)
