"""Tests for sum-of-products expansion, simplification and symbolic structures."""

import math

import numpy as np
import pytest

from gpmem.core.errors import ConfigError, ParseError
from gpmem.kernels.algebra import (
    DERIVED_SCOPE,
    ProductTerm,
    StructExpr,
    describe,
    parse_struct,
    parse_to_sum_of_products,
    simplify,
    struct_of,
    terms_of,
)
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.evaluate import gram_matrix
from gpmem.kernels.expr import Product, Sum, params_of
from gpmem.kernels.params import HyperParams
from gpmem.kernels.text import parse_kernel


def _table(expr, rng):
    names = params_of(expr)
    values = rng.uniform(0.5, 2.0, len(names))
    return HyperParams.build(
        (n, float(v), "hyper", None) for n, v in zip(names, values, strict=True)
    )


class TestSumOfProducts:
    def test_distributes(self):
        terms = terms_of(parse_kernel("LIN(a) * (SE(b, l) + WN(c))"))
        assert [[leaf.kind for leaf in t] for t in terms] == [
            [BaseKernelKind.LIN, BaseKernelKind.SE],
            [BaseKernelKind.LIN, BaseKernelKind.WN],
        ]

    def test_rebuilt_shape(self):
        product = parse_kernel("(LIN(a) + WN(b)) * (SE(c, l) + PER(d, p, m))")
        expr = parse_to_sum_of_products(product)
        assert isinstance(expr, Sum)
        assert len(terms_of(expr)) == 4
        assert all(isinstance(t, Product) for t in (expr.right, expr.left.right))

    def test_preserves_covariance(self, rng):
        expr = parse_kernel("(LIN(a) + WN(b)) * (SE(c, l) + PER(d, p, m))")
        params = _table(expr, rng)
        xs = rng.uniform(-2, 2, 7)
        np.testing.assert_allclose(
            gram_matrix(parse_to_sum_of_products(expr), params, xs),
            gram_matrix(expr, params, xs),
            rtol=1e-12,
        )


class TestSimplify:
    @pytest.mark.parametrize(
        "text",
        [
            "SE(a, l) * SE(b, m)",
            "LIN(a) + LIN(b) + SE(c, l)",
            "SE(a, l) * WN(b)",
            "CONST(c) * PER(a, p, l)",
            "CONST(a) * CONST(b)",
            "LIN(a) * WN(b) + WN(c) * WN(d) * RQ(e, f, g)",
            "CONST(c) * SE(a, l) * SE(b, m) + LIN(d) + LIN(e) + PER(f, p, q) * WN(g)",
        ],
    )
    def test_preserves_covariance(self, text, rng):
        expr = parse_kernel(text)
        params = _table(expr, rng)
        simplified, derived = simplify(expr, params)
        xs = np.array([-1.5, -0.3, 0.0, 0.0, 0.7, 1.9, 1.9])
        np.testing.assert_allclose(
            gram_matrix(simplified, derived, xs), gram_matrix(expr, params, xs), rtol=1e-10
        )

    def test_squared_exponentials_merge(self):
        expr = parse_kernel("SE(a, l) * SE(b, m)")
        params = HyperParams.build(
            [("a", 2.0, "hyper", None), ("l", 1.0, "hyper", None),
             ("b", 3.0, "hyper", None), ("m", 2.0, "hyper", None)]
        )
        simplified, derived = simplify(expr, params)
        assert str(simplified) == "SE(_d0_sf,_d0_l)"
        assert derived["_d0_sf"] == pytest.approx(6.0)
        assert derived["_d0_l"] == pytest.approx(1.0 / math.sqrt(1.25))
        assert derived.scopes["_d0_sf"] == DERIVED_SCOPE
        assert derived.priors["_d0_sf"] is None

    def test_linear_terms_merge(self):
        params = HyperParams.build([("a", 3.0, "hyper", None), ("b", 4.0, "hyper", None)])
        simplified, derived = simplify(parse_kernel("LIN(a) + LIN(b)"), params)
        leaf = simplified
        assert leaf.kind is BaseKernelKind.LIN
        assert derived[leaf.params[0]] == pytest.approx(5.0)

    def test_input_table_untouched(self):
        params = HyperParams.build([("a", 3.0, "hyper", None), ("b", 4.0, "hyper", None)])
        simplify(parse_kernel("LIN(a) + LIN(b)"), params)
        assert len(params) == 2

    def test_unchanged_expression_keeps_names(self):
        expr = parse_kernel("LIN(a) * SE(b, l)")
        params = HyperParams.build(
            [("a", 1.0, "hyper", None), ("b", 1.0, "hyper", None), ("l", 1.0, "hyper", None)]
        )
        simplified, derived = simplify(expr, params)
        assert simplified == expr
        assert derived is params

    def test_derived_names_avoid_clashes(self):
        expr = parse_kernel("SE(_d0_sf, l) * SE(b, m)")
        params = _table(expr, np.random.default_rng(0))
        simplified, _ = simplify(expr, params)
        assert "_d0_sf" not in simplified.params


class TestStructOf:
    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("SE(a, l) * SE(b, m)", "SE"),
            ("LIN(a) + LIN(b)", "LIN"),
            ("SE(a, l) * WN(b)", "WN"),
            ("LIN(a) * WN(b)", "LIN*WN"),
            ("CONST(c) * SE(a, l)", "SE"),
            ("WN(a) + SE(b, l) * PER(c, p, m) + LIN(d)", "LIN + PER*SE + WN"),
            ("LIN(a) * (SE(b, l) + WN(c))", "LIN*SE + LIN*WN"),
            ("LIN(a) * LIN(b)", "LIN*LIN"),
        ],
    )
    def test_canonical_form(self, text, expected):
        assert str(struct_of(parse_kernel(text))) == expected

    def test_rational_quadratic_has_no_structure(self):
        with pytest.raises(ConfigError, match="RQ has no symbolic structure"):
            struct_of(parse_kernel("RQ(a, b, c) + LIN(d)"))

    def test_hashable_and_order_free(self):
        a = struct_of(parse_kernel("WN(a) + PER(b, p, l) * SE(c, m)"))
        b = parse_struct("SE*PER + WN")
        assert a == b
        assert len({a, b}) == 1

    def test_contains(self):
        struct = parse_struct("LIN + SE*PER")
        assert ProductTerm.of(["PER", "SE"]) in struct
        assert ProductTerm.of(["SE"]) not in struct


class TestParseStruct:
    def test_constant_symbol(self):
        struct = parse_struct("C + LIN")
        assert str(struct) == "C + LIN"

    def test_times_sign(self):
        assert parse_struct("SE×PER") == parse_struct("PER*SE")

    def test_unknown_symbol_position(self):
        with pytest.raises(ParseError) as excinfo:
            parse_struct("LIN + SE*FOO")
        assert excinfo.value.position == 9

    def test_empty_term(self):
        with pytest.raises(ParseError):
            parse_struct("LIN + ")

    def test_empty_struct_sorting(self):
        assert StructExpr.of([]).terms == ()


class TestDescribe:
    def test_glosses(self):
        assert describe(parse_struct("LIN + PER*SE + WN")) == [
            "LIN: a linear trend",
            "PER*SE: an approximately periodic pattern",
            "WN: white noise",
        ]

    def test_fallback(self):
        (entry,) = describe(parse_struct("LIN*PER*SE"))
        assert entry == "LIN*PER*SE: an interaction of 3 components"
