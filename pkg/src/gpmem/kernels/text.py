"""Parse the kernel text form: ``SE(sf,l) + LIN(s) * (PER(s2,p,l2) + WN(n))``."""

from __future__ import annotations

import re
from dataclasses import dataclass

from gpmem.core.errors import ConfigError, ParseError
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.expr import Base, KernelExpr, Product, Sum

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_.]*)|(?P<op>[()+*,]))")


@dataclass(frozen=True)
class Token:
    """A lexeme and its character offset."""

    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    """Split into names and the punctuation ``( ) + * ,``."""
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ParseError("unexpected character", text, pos)
        group = match.lastgroup
        assert group is not None
        tokens.append(Token(match.group(group), match.start(group)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            pos = tok.pos if tok is not None else len(self.text)
            raise ParseError(f"expected '{text}'", self.text, pos)
        self.i += 1
        return tok

    def parse(self) -> KernelExpr:
        expr = self.sum()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected '{tok.text}'", self.text, tok.pos)
        return expr

    def sum(self) -> KernelExpr:
        expr = self.product()
        while (tok := self.peek()) is not None and tok.text == "+":
            self.i += 1
            expr = Sum(expr, self.product())
        return expr

    def product(self) -> KernelExpr:
        expr = self.factor()
        while (tok := self.peek()) is not None and tok.text == "*":
            self.i += 1
            expr = Product(expr, self.factor())
        return expr

    def factor(self) -> KernelExpr:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.text, len(self.text))
        if tok.text == "(":
            self.i += 1
            expr = self.sum()
            self.expect(")")
            return expr
        self.i += 1
        try:
            kind = BaseKernelKind(tok.text.upper())
        except ValueError:
            raise ParseError(f"unknown kernel symbol '{tok.text}'", self.text, tok.pos) from None
        self.expect("(")
        names: list[str] = []
        while True:
            name = self.peek()
            if name is None or not _TOKEN.fullmatch(name.text) or name.text in "()+*,":
                pos = name.pos if name is not None else len(self.text)
                raise ParseError("expected a parameter name", self.text, pos)
            names.append(name.text)
            self.i += 1
            if (sep := self.peek()) is not None and sep.text == ",":
                self.i += 1
                continue
            break
        self.expect(")")
        try:
            return Base(kind, tuple(names))
        except ConfigError as exc:
            raise ParseError(str(exc), self.text, tok.pos) from None


def parse_kernel(text: str) -> KernelExpr:
    """Parse a kernel expression; product binds tighter than sum, both left-associative."""
    return _Parser(text).parse()
