"""Symbolic kernel algebra: sum-of-products form, simplification and Struct().

The pipeline is ``struct_of = canonicalise ∘ simplify ∘ parse_to_sum_of_products``.
``simplify`` folds parameters numerically, so its output evaluates to exactly
the same covariance as its input; the folded values live in a new
:class:`HyperParams` table under derived names (scope ``derived``, no prior).
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable
from dataclasses import dataclass
from functools import reduce

from gpmem.core.errors import ConfigError, ParseError
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.expr import Base, KernelExpr, Product, Sum, params_of
from gpmem.kernels.params import HyperParams
from gpmem.kernels.registry import get_formula

DERIVED_SCOPE = "derived"

# ── sum of products ─────────────────────────────────────────────────────


def terms_of(expr: KernelExpr) -> list[list[Base]]:
    """Distribute products over sums; each inner list is one product term."""
    if isinstance(expr, Base):
        return [[expr]]
    left, right = terms_of(expr.left), terms_of(expr.right)
    if isinstance(expr, Sum):
        return left + right
    return [lt + rt for lt in left for rt in right]


def from_terms(terms: Iterable[Iterable[Base]]) -> KernelExpr:
    """Rebuild a left-folded sum of left-folded products."""
    products = [reduce(Product, list(term)) for term in terms]
    if not products:
        raise ConfigError("cannot build a kernel from zero terms")
    return reduce(Sum, products)


def parse_to_sum_of_products(expr: KernelExpr) -> KernelExpr:
    """Fully distribute Product over Sum, keeping parameters."""
    return from_terms(terms_of(expr))


# ── simplification ──────────────────────────────────────────────────────


@dataclass
class _Factor:
    kind: BaseKernelKind
    theta: list[float]
    names: tuple[str, ...] | None  # None once folded

    def scale(self, sf: float) -> None:
        self.theta[0] *= sf
        self.names = None


_ABSORBED_BY_WN = {
    BaseKernelKind.SE,
    BaseKernelKind.PER,
    BaseKernelKind.CONST,
    BaseKernelKind.WN,
    BaseKernelKind.RQ,
}


def _absorb_constants(term: list[_Factor]) -> bool:
    consts = [f for f in term if f.kind is BaseKernelKind.CONST]
    others = [f for f in term if f.kind is not BaseKernelKind.CONST]
    if not consts or (not others and len(consts) == 1):
        return False
    scale = math.prod(c.theta[0] for c in consts)
    if others:
        others[0].scale(scale)
        term[:] = others
    else:
        term[:] = [_Factor(BaseKernelKind.CONST, [scale], None)]
    return True


def _absorb_into_noise(term: list[_Factor]) -> bool:
    if not any(f.kind is BaseKernelKind.WN for f in term):
        return False
    absorbed = [f for f in term if f.kind in _ABSORBED_BY_WN]
    if len(absorbed) == 1:
        return False
    # k(x, x) = σ² for every absorbed kind, and δ zeroes everything else.
    sf = math.prod(f.theta[0] for f in absorbed)
    kept = [f for f in term if f.kind not in _ABSORBED_BY_WN]
    term[:] = [*kept, _Factor(BaseKernelKind.WN, [sf], None)]
    return True


def _merge_squared_exponentials(term: list[_Factor]) -> bool:
    ses = [f for f in term if f.kind is BaseKernelKind.SE]
    if len(ses) < 2:
        return False
    sf = math.prod(f.theta[0] for f in ses)
    ell = 1.0 / math.sqrt(sum(1.0 / f.theta[1] ** 2 for f in ses))
    kept = [f for f in term if f.kind is not BaseKernelKind.SE]
    term[:] = [*kept, _Factor(BaseKernelKind.SE, [sf, ell], None)]
    return True


_TERM_RULES = (_absorb_constants, _absorb_into_noise, _merge_squared_exponentials)


def _merge_linear_terms(terms: list[list[_Factor]]) -> bool:
    lone = [i for i, t in enumerate(terms) if len(t) == 1 and t[0].kind is BaseKernelKind.LIN]
    if len(lone) < 2:
        return False
    sf = math.sqrt(sum(terms[i][0].theta[0] ** 2 for i in lone))
    merged = [_Factor(BaseKernelKind.LIN, [sf], None)]
    first = lone[0]
    terms[:] = [
        merged if i == first else t for i, t in enumerate(terms) if i == first or i not in lone
    ]
    return True


def _allocate(factor: _Factor, taken: set[str], counter: list[int]) -> tuple[str, ...]:
    if factor.names is not None:
        return factor.names
    roles = get_formula(factor.kind).meta.roles
    while True:
        prefix = f"_d{counter[0]}"
        counter[0] += 1
        names = tuple(f"{prefix}_{role}" for role in roles)
        if not taken.intersection(names):
            taken.update(names)
            return names


def simplify(expr: KernelExpr, params: HyperParams) -> tuple[KernelExpr, HyperParams]:
    """Apply the rewrite rules to a fixpoint, folding parameters.

    Rules: SE×SE → SE (σ multiplies, 1/ℓ² adds); any stationary factor × WN → WN
    (σ multiplies); LIN + LIN → LIN (σ² adds); K × CONST → K with σ scaled.
    Returns the simplified expression and a new table holding the original
    values plus any derived ones. ``params`` is left untouched.
    """
    terms = [
        [_Factor(b.kind, [params[n] for n in b.params], b.params) for b in term]
        for term in terms_of(expr)
    ]
    changed = True
    while changed:
        changed = False
        for term in terms:
            for rule in _TERM_RULES:
                while rule(term):
                    changed = True
        while _merge_linear_terms(terms):
            changed = True

    taken = set(params.values)
    counter = [0]
    rows: list[tuple[str, float, str, None]] = []
    rebuilt: list[list[Base]] = []
    for term in terms:
        bases = []
        for factor in term:
            fresh = factor.names is None
            names = _allocate(factor, taken, counter)
            if fresh:
                rows.extend(
                    (n, v, DERIVED_SCOPE, None)
                    for n, v in zip(names, factor.theta, strict=True)
                )
            bases.append(Base(factor.kind, names))
        rebuilt.append(bases)
    derived = params.merged(HyperParams.build(rows)) if rows else params
    return from_terms(rebuilt), derived


# ── symbolic structures ─────────────────────────────────────────────────


@dataclass(frozen=True, order=True)
class ProductTerm:
    """A multiset of base kinds, stored in canonical rank order."""

    ranks: tuple[int, ...]

    @classmethod
    def of(cls, kinds: Iterable[BaseKernelKind | str]) -> ProductTerm:
        """Canonicalise a collection of kinds into a term."""
        resolved = [_symbol_kind(k) if isinstance(k, str) else k for k in kinds]
        if BaseKernelKind.RQ in resolved:
            raise ConfigError("RQ has no symbolic structure")
        if not resolved:
            raise ConfigError("a product term needs at least one factor")
        return cls(tuple(sorted(k.rank for k in resolved)))

    @property
    def kinds(self) -> tuple[BaseKernelKind, ...]:
        """Factors in canonical order."""
        order = list(BaseKernelKind)
        return tuple(order[r] for r in self.ranks)

    def __str__(self) -> str:
        return "*".join(k.symbol for k in self.kinds)


@dataclass(frozen=True)
class StructExpr:
    """Canonical sum of product terms over {C, LIN, PER, SE, WN}, parameters erased."""

    terms: tuple[ProductTerm, ...]

    @classmethod
    def of(cls, terms: Iterable[ProductTerm]) -> StructExpr:
        """Sort terms into canonical order."""
        return cls(tuple(sorted(terms)))

    def __contains__(self, term: object) -> bool:
        return term in self.terms

    def __str__(self) -> str:
        return " + ".join(str(t) for t in self.terms)


def struct_of(expr: KernelExpr, params: HyperParams | None = None) -> StructExpr:
    """Canonical symbolic form of ``simplify(parse_to_sum_of_products(expr))``.

    Symbolic rules do not depend on parameter values, so ``params`` is optional;
    placeholder values are used when it is omitted.
    """
    if params is None:
        params = HyperParams(
            values={n: 1.0 for n in params_of(expr)},
            scopes={n: "struct" for n in params_of(expr)},
        )
    simplified, _ = simplify(parse_to_sum_of_products(expr), params)
    return StructExpr.of(ProductTerm.of(b.kind for b in term) for term in terms_of(simplified))


_SYMBOLS = {"C": BaseKernelKind.CONST, **{k.value: k for k in BaseKernelKind}}
_STRUCT_TOKEN = re.compile(r"\s*([A-Za-z]+)\s*")


def _symbol_kind(symbol: str) -> BaseKernelKind:
    try:
        return _SYMBOLS[symbol.strip().upper()]
    except KeyError:
        raise ConfigError(f"unknown kernel symbol '{symbol.strip()}'") from None


def parse_term(text: str, offset: int = 0, whole: str | None = None) -> ProductTerm:
    """Parse ``SE*PER`` (``×`` also accepted) into a product term."""
    whole = text if whole is None else whole
    kinds: list[BaseKernelKind] = []
    pos = 0
    for chunk in re.split(r"[*×]", text):
        match = _STRUCT_TOKEN.fullmatch(chunk)
        if match is None:
            raise ParseError("expected a kernel symbol", whole, offset + pos)
        try:
            kinds.append(_symbol_kind(match.group(1)))
        except ConfigError:
            raise ParseError(
                f"unknown kernel symbol '{match.group(1)}'", whole, offset + pos + match.start(1)
            ) from None
        pos += len(chunk) + 1
    return ProductTerm.of(kinds)


def parse_struct(text: str) -> StructExpr:
    """Parse ``LIN + SE*PER + WN``; order of terms and factors is irrelevant."""
    terms = []
    pos = 0
    for chunk in text.split("+"):
        terms.append(parse_term(chunk, pos, text))
        pos += len(chunk) + 1
    return StructExpr.of(terms)


_GLOSS = {
    (BaseKernelKind.LIN,): "a linear trend",
    (BaseKernelKind.PER,): "a periodic pattern",
    (BaseKernelKind.SE,): "a smooth function",
    (BaseKernelKind.WN,): "white noise",
    (BaseKernelKind.CONST,): "a constant offset",
    (BaseKernelKind.LIN, BaseKernelKind.SE): "a smooth trend",
    (BaseKernelKind.PER, BaseKernelKind.SE): "an approximately periodic pattern",
    (BaseKernelKind.LIN, BaseKernelKind.PER): "a periodic pattern with growing amplitude",
    (BaseKernelKind.LIN, BaseKernelKind.WN): "noise with growing amplitude",
    (BaseKernelKind.LIN, BaseKernelKind.LIN): "a quadratic trend",
}


def describe(struct: StructExpr) -> list[str]:
    """Plain-English gloss of each additive component, in canonical order."""
    out = []
    for term in struct.terms:
        gloss = _GLOSS.get(term.kinds)
        gloss = gloss or f"an interaction of {len(term.kinds)} components"
        out.append(f"{term}: {gloss}")
    return out
