"""Formulas of BL with Baaz delta and involutive negation.

Concrete syntax, loosest binding first::

    ->   implication (right associative)
    \\/   disjunction (max)
    /\\   weak conjunction (min)
    &    strong conjunction (t-norm)
    ~ D  involutive negation, Baaz delta (prefix)

``0`` and ``1`` are falsum and verum; atoms match ``[a-z][a-zA-Z0-9_]*``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Verum:
    pass


@dataclass(frozen=True)
class Strong:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Impl:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class And:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Delta:
    sub: Formula


@dataclass(frozen=True)
class Inv:
    sub: Formula


Formula = Union[Atom, Falsum, Verum, Strong, Impl, Or, And, Delta, Inv]

BINARY = (Strong, Impl, Or, And)
UNARY = (Delta, Inv)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


_TOKEN = re.compile(r"->|\\/|/\\|&|~|D|[a-z][a-zA-Z0-9_]*|0|1|\(|\)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    # identifiers start lowercase, so "Dr" is delta applied to r
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            return tokens
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        tokens.append((m.group(0), pos))
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def fail(self, message: str):
        raise FormulaSyntaxError(message, self.text, self.pos())

    def parse(self) -> Formula:
        if not self.tokens:
            self.fail("empty formula")
        f = self.impl()
        if self.peek() is not None:
            self.fail(f"unexpected token {self.peek()!r}")
        return f

    def impl(self) -> Formula:
        lhs = self.disj()
        if self.peek() == "->":
            self.take()
            return Impl(lhs, self.impl())
        return lhs

    def _left_assoc(self, op: str, sub, ctor) -> Formula:
        f = sub()
        while self.peek() == op:
            self.take()
            f = ctor(f, sub())
        return f

    def disj(self) -> Formula:
        return self._left_assoc("\\/", self.conj, Or)

    def conj(self) -> Formula:
        return self._left_assoc("/\\", self.strong, And)

    def strong(self) -> Formula:
        return self._left_assoc("&", self.unary, Strong)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        if tok == "~":
            self.take()
            return Inv(self.unary())
        if tok == "D":
            self.take()
            if self.peek() in (None, ")", "->", "\\/", "/\\", "&"):
                self.fail("'D' is reserved for the delta connective and needs an operand")
            return Delta(self.unary())
        if tok == "0":
            self.take()
            return Falsum()
        if tok == "1":
            self.take()
            return Verum()
        if tok == "(":
            self.take()
            f = self.impl()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.take()
            return f
        if tok[0].islower():
            self.take()
            return Atom(tok)
        self.fail(f"unexpected token {tok!r}")


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()


_PREC = {Impl: 1, Or: 2, And: 3, Strong: 4}
_SYMBOL = {Impl: "->", Or: "\\/", And: "/\\", Strong: "&"}


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 5)


def render_formula(f: Formula) -> str:
    """Render with the fewest parentheses that still parse back to ``f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Falsum):
        return "0"
    if isinstance(f, Verum):
        return "1"
    if isinstance(f, Inv):
        return "~" + _wrap(f.sub, _prec(f.sub) < 5)
    if isinstance(f, Delta):
        return "D " + _wrap(f.sub, _prec(f.sub) < 5)
    p = _PREC[type(f)]
    if isinstance(f, Impl):
        left = _wrap(f.lhs, _prec(f.lhs) <= p)
        right = _wrap(f.rhs, _prec(f.rhs) < p)
    else:
        left = _wrap(f.lhs, _prec(f.lhs) < p)
        right = _wrap(f.rhs, _prec(f.rhs) <= p)
    return f"{left} {_SYMBOL[type(f)]} {right}"


def _wrap(f: Formula, parens: bool) -> str:
    s = render_formula(f)
    return f"({s})" if parens else s


def atoms(f: Formula) -> Iterator[str]:
    """Atom names in left-to-right order of first occurrence (with repeats)."""
    if isinstance(f, Atom):
        yield f.name
    elif isinstance(f, BINARY):
        yield from atoms(f.lhs)
        yield from atoms(f.rhs)
    elif isinstance(f, UNARY):
        yield from atoms(f.sub)
