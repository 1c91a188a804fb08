"""Boolean queries over posterior structure samples.

``P(q) = 1/T Σ_t [q holds for sample t]`` where atoms test whether a product
term is one of the sample's additive components. Text form::

    LIN AND (SE*PER OR PER)
    NOISE OR TREND
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce

from gpmem.core.errors import ParseError
from gpmem.kernels.algebra import ProductTerm, StructExpr, parse_struct, parse_term
from gpmem.structure.discovery import PosteriorSampleSet


@dataclass(frozen=True)
class Term:
    term: ProductTerm

    def __str__(self) -> str:
        return str(self.term)


@dataclass(frozen=True)
class And:
    left: Query
    right: Query

    def __str__(self) -> str:
        return f"({self.left} AND {self.right})"


@dataclass(frozen=True)
class Or:
    left: Query
    right: Query

    def __str__(self) -> str:
        return f"({self.left} OR {self.right})"


Query = Term | And | Or


def _any_of(*terms: str) -> Query:
    return reduce(Or, [Term(parse_term(t)) for t in terms])


SHORTHANDS: dict[str, Query] = {
    "TREND": _any_of("LIN", "LIN*SE"),
    "RECURRING": _any_of("PER", "PER*SE", "LIN*PER"),
    "NOISE": _any_of("WN", "LIN*WN"),
}


def cont(query: ProductTerm | StructExpr, sample: StructExpr) -> int:
    """1 iff every additive term of ``query`` is exactly an additive term of ``sample``."""
    terms = query.terms if isinstance(query, StructExpr) else (query,)
    return int(all(t in sample for t in terms))


def holds(query: Query, sample: StructExpr) -> bool:
    """Evaluate a query against one sample."""
    if isinstance(query, Term):
        return bool(cont(query.term, sample))
    if isinstance(query, And):
        return holds(query.left, sample) and holds(query.right, sample)
    return holds(query.left, sample) or holds(query.right, sample)


def atoms(query: Query) -> list[ProductTerm]:
    """Distinct product terms mentioned, in first-appearance order."""
    if isinstance(query, Term):
        return [query.term]
    out = atoms(query.left)
    return out + [t for t in atoms(query.right) if t not in out]


# ── parsing ─────────────────────────────────────────────────────────────

_SPLIT = re.compile(r"(\(|\)|\bAND\b|\bOR\b|&&?|\|\|?|∧|∨)", re.IGNORECASE)


class _QueryParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        for piece in _SPLIT.split(text):
            if piece.strip():
                self.tokens.append((piece, pos))
            pos += len(piece)
        self.i = 0

    def _peek(self) -> str | None:
        return _op(self.tokens[self.i][0]) if self.i < len(self.tokens) else None

    def _pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def parse(self) -> Query:
        if not self.tokens:
            raise ParseError("empty query", self.text, 0)
        query = self.disjunction()
        if self.i < len(self.tokens):
            piece = self.tokens[self.i][0].strip()
            raise ParseError(f"unexpected '{piece}'", self.text, self._pos())
        return query

    def disjunction(self) -> Query:
        query = self.conjunction()
        while self._peek() == "OR":
            self.i += 1
            query = Or(query, self.conjunction())
        return query

    def conjunction(self) -> Query:
        query = self.atom()
        while self._peek() == "AND":
            self.i += 1
            query = And(query, self.atom())
        return query

    def atom(self) -> Query:
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of query", self.text, len(self.text))
        piece, pos = self.tokens[self.i]
        op = _op(piece)
        if op == "(":
            self.i += 1
            query = self.disjunction()
            if self._peek() != ")":
                raise ParseError("expected ')'", self.text, self._pos())
            self.i += 1
            return query
        if op in ("AND", "OR", ")"):
            raise ParseError(f"unexpected '{piece.strip()}'", self.text, pos)
        self.i += 1
        word = piece.strip().upper()
        if word in SHORTHANDS:
            return SHORTHANDS[word]
        offset = pos + len(piece) - len(piece.lstrip())
        struct = _parse_struct_at(piece.strip(), self.text, offset)
        return reduce(And, [Term(t) for t in struct.terms])


def _op(piece: str) -> str:
    p = piece.strip().upper()
    if p in ("AND", "&", "&&", "∧"):
        return "AND"
    if p in ("OR", "|", "||", "∨"):
        return "OR"
    return p


def _parse_struct_at(chunk: str, whole: str, offset: int) -> StructExpr:
    try:
        return parse_struct(chunk)
    except ParseError as exc:
        raise ParseError(str(exc).split(" at position")[0], whole, offset + exc.position) from None


def parse_query(text: str) -> Query:
    """Parse ``AND`` / ``OR`` / parentheses over terms like ``SE*PER``; AND binds tighter."""
    return _QueryParser(text).parse()


def query_prob(query: Query | str, samples: PosteriorSampleSet) -> float:
    """Fraction of samples for which ``query`` holds.

    Raises:
        DataError: the sample set is empty.
    """
    samples.require_samples()
    q = parse_query(query) if isinstance(query, str) else query
    hits = sum(holds(q, s) for s in samples.structures)
    return hits / len(samples)


def query_breakdown(query: Query | str, samples: PosteriorSampleSet) -> dict[str, float]:
    """Probability of the whole query and of each atomic term in it."""
    q = parse_query(query) if isinstance(query, str) else query
    out = {"query": query_prob(q, samples)}
    for term in atoms(q):
        out[str(term)] = query_prob(Term(term), samples)
    return out
