"""Constraint terms, tableau formulas and the translation of BL formulas.

L0 terms are built from variables, parameters, rational constants, interval
endpoint constants and ``+ - · ÷ min max``.  L1 terms may additionally use
the uninterpreted t-norm ``*``, its residuum ``=>`` and the delta ``D``.

Text notation (used in traces and by :func:`parse_constraints`)::

    1 => (mu_p * mu_r) < c1- or c1+ <= 1 => (mu_p * mu_r)
    a0L <= max{a1L, mu_p + mu_r - b1L} < 1 <= b0L

``1/2`` without spaces is a rational literal; division is written `` / ``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Union

from . import formula as F
from .kset import Interval, fmt_rat
from .numeric import decide, eq, is_zero, le, lt, nmax, nmin


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Endpoint:
    """c_i- (which="-") or c_i+ (which="+"): an endpoint of the i-th complement interval."""
    which: str
    index: int


@dataclass(frozen=True)
class Add:
    l: Term
    r: Term


@dataclass(frozen=True)
class Sub:
    l: Term
    r: Term


@dataclass(frozen=True)
class Mul:
    l: Term
    r: Term


@dataclass(frozen=True)
class Div:
    l: Term
    r: Term


@dataclass(frozen=True)
class Min:
    l: Term
    r: Term


@dataclass(frozen=True)
class Max:
    l: Term
    r: Term


@dataclass(frozen=True)
class TNorm:
    l: Term
    r: Term


@dataclass(frozen=True)
class Resid:
    l: Term
    r: Term


@dataclass(frozen=True)
class DeltaFn:
    sub: Term


Term = Union[Var, Param, Const, Endpoint, Add, Sub, Mul, Div, Min, Max, TNorm, Resid, DeltaFn]

LEAVES = (Var, Param, Const, Endpoint)
BINARY = (Add, Sub, Mul, Div, Min, Max, TNorm, Resid)
INTERPRETED = (TNorm, Resid, DeltaFn)

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


@dataclass(frozen=True)
class Cmp:
    op: str  # "<=", "<" or "="
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.op not in ("<=", "<", "="):
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class Disjunct:
    lhs: Cmp
    rhs: Cmp


TableauFormula = Union[Cmp, Disjunct]


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, BINARY):
        return (t.l, t.r)
    if isinstance(t, DeltaFn):
        return (t.sub,)
    return ()


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for c in children(t):
        yield from subterms(c)


def formula_terms(g: TableauFormula) -> tuple[Term, ...]:
    if isinstance(g, Disjunct):
        return (g.lhs.lhs, g.lhs.rhs, g.rhs.lhs, g.rhs.rhs)
    return (g.lhs, g.rhs)


def is_l0_term(t: Term) -> bool:
    return not any(isinstance(s, INTERPRETED) for s in subterms(t))


def is_l0(g: TableauFormula) -> bool:
    return isinstance(g, Cmp) and is_l0_term(g.lhs) and is_l0_term(g.rhs)


def symbols(g) -> set[Var | Param]:
    """Variables and parameters occurring in a term or tableau formula."""
    terms = formula_terms(g) if isinstance(g, (Cmp, Disjunct)) else (g,)
    return {s for t in terms for s in subterms(t) if isinstance(s, (Var, Param))}


def interpreted_subterms(fs: Iterable[TableauFormula]) -> set[Term]:
    return {s for g in fs for t in formula_terms(g) for s in subterms(t)
            if isinstance(s, INTERPRETED)}


# -- translation -----------------------------------------------------------

@dataclass
class TranslationMap:
    """One-to-one assignment of variables to atoms, extended on demand."""
    atom_to_var: dict[str, str] = field(default_factory=dict)

    def var(self, atom: str) -> Var:
        if atom not in self.atom_to_var:
            self.atom_to_var[atom] = f"mu_{atom}"
        return Var(self.atom_to_var[atom])

    def atom_of(self, var_name: str) -> str:
        for atom, v in self.atom_to_var.items():
            if v == var_name:
                return atom
        raise KeyError(var_name)


def translate(f: F.Formula, m: TranslationMap) -> Term:
    if isinstance(f, F.Falsum):
        return ZERO
    if isinstance(f, F.Verum):
        return ONE
    if isinstance(f, F.Atom):
        return m.var(f.name)
    if isinstance(f, F.Strong):
        return TNorm(translate(f.lhs, m), translate(f.rhs, m))
    if isinstance(f, F.Impl):
        return Resid(translate(f.lhs, m), translate(f.rhs, m))
    if isinstance(f, F.Or):
        return Max(translate(f.lhs, m), translate(f.rhs, m))
    if isinstance(f, F.And):
        return Min(translate(f.lhs, m), translate(f.rhs, m))
    if isinstance(f, F.Delta):
        return DeltaFn(translate(f.sub, m))
    if isinstance(f, F.Inv):
        return Sub(ONE, translate(f.sub, m))
    raise TypeError(f"not a formula: {f!r}")


def lower_op(j: Interval) -> str:
    # closed left end of J needs a strict comparison to stay outside it
    return "<" if j.lo_closed else "<="


def upper_op(j: Interval) -> str:
    return "<" if j.hi_closed else "<="


def eta(x: Term, j: Interval, i: int) -> Disjunct:
    """The disjunct formula saying x lies outside J_i."""
    return Disjunct(Cmp(lower_op(j), x, Endpoint("-", i)),
                    Cmp(upper_op(j), Endpoint("+", i), x))


# -- substitution ----------------------------------------------------------

def replace_term(t: Term, replacement: Term, target: Term) -> Term:
    if t == target:
        return replacement
    if isinstance(t, BINARY):
        l, r = replace_term(t.l, replacement, target), replace_term(t.r, replacement, target)
        if l is t.l and r is t.r:
            return t
        return type(t)(l, r)
    if isinstance(t, DeltaFn):
        sub = replace_term(t.sub, replacement, target)
        return t if sub is t.sub else DeltaFn(sub)
    return t


def substitute(g: TableauFormula, replacement: Term, target: Term) -> TableauFormula:
    """g[replacement/target]: replace every occurrence of the whole term target."""
    if isinstance(g, Disjunct):
        return Disjunct(substitute(g.lhs, replacement, target),
                        substitute(g.rhs, replacement, target))
    lhs = replace_term(g.lhs, replacement, target)
    rhs = replace_term(g.rhs, replacement, target)
    if lhs is g.lhs and rhs is g.rhs:
        return g
    return Cmp(g.op, lhs, rhs)


def inline_endpoints(g, complement: list[Interval]):
    """Replace c_i-/c_i+ with the rational endpoints of the 1-based J_i."""
    for i, j in enumerate(complement, start=1):
        g = substitute(g, Const(j.lo), Endpoint("-", i))
        g = substitute(g, Const(j.hi), Endpoint("+", i))
    return g


# -- evaluation ------------------------------------------------------------

def evaluate_term(t: Term, env: dict, endpoints: dict | None = None):
    """Value of an L0 term over the reals, with x ÷ 0 = 0.

    ``env`` maps variable and parameter names to Fraction or Approx values;
    ``endpoints`` maps ``(which, index)`` to the endpoint rationals.
    """
    if isinstance(t, Const):
        return t.value
    if isinstance(t, (Var, Param)):
        return env[t.name]
    if isinstance(t, Endpoint):
        return endpoints[(t.which, t.index)]
    if isinstance(t, INTERPRETED):
        raise ValueError(f"not an L0 term: {show_term(t)}")
    l = evaluate_term(t.l, env, endpoints)
    r = evaluate_term(t.r, env, endpoints)
    if isinstance(t, Add):
        return l + r
    if isinstance(t, Sub):
        return l - r
    if isinstance(t, Mul):
        return l * r
    if isinstance(t, Min):
        return nmin(l, r)
    if isinstance(t, Max):
        return nmax(l, r)
    # Div
    if decide(is_zero(r)):
        return Fraction(0)
    return l / r


def holds(g: Cmp, env: dict, endpoints: dict | None = None) -> bool | None:
    lhs = evaluate_term(g.lhs, env, endpoints)
    rhs = evaluate_term(g.rhs, env, endpoints)
    return {"<=": le, "<": lt, "=": eq}[g.op](lhs, rhs)


# -- text ------------------------------------------------------------------

_PREC = {Resid: 1, Add: 2, Sub: 2, TNorm: 3, Mul: 3, Div: 3}
_SYM = {Resid: "=>", Add: "+", Sub: "-", TNorm: "*", Mul: "·", Div: "/"}


def _tprec(t: Term) -> int:
    if isinstance(t, Const) and t.value < 0:
        return 0
    if isinstance(t, DeltaFn):
        return 4
    return _PREC.get(type(t), 5)


def show_term(t: Term) -> str:
    if isinstance(t, (Var, Param)):
        return t.name
    if isinstance(t, Const):
        return fmt_rat(t.value) if t.value >= 0 else f"(-{fmt_rat(-t.value)})"
    if isinstance(t, Endpoint):
        return f"c{t.index}{t.which}"
    if isinstance(t, DeltaFn):
        inner = show_term(t.sub)
        return f"D {inner}" if _tprec(t.sub) >= 4 else f"D ({inner})"
    if isinstance(t, (Min, Max)):
        return f"{type(t).__name__.lower()}{{{show_term(t.l)}, {show_term(t.r)}}}"
    p = _PREC[type(t)]
    right_assoc = isinstance(t, Resid)
    lp = _tprec(t.l) <= p if right_assoc else _tprec(t.l) < p
    rp = _tprec(t.r) < p if right_assoc else _tprec(t.r) <= p
    left = f"({show_term(t.l)})" if lp else show_term(t.l)
    right = f"({show_term(t.r)})" if rp else show_term(t.r)
    return f"{left} {_SYM[type(t)]} {right}"


def show(g: TableauFormula) -> str:
    if isinstance(g, Disjunct):
        return f"{show(g.lhs)} or {show(g.rhs)}"
    return f"{show_term(g.lhs)} {g.op} {show_term(g.rhs)}"


_TTOKEN = re.compile(r"\s*(=>|<=|<|=|\d+/\d+|\d+|c\d+[-+]|[A-Za-z_][A-Za-z0-9_]*|[-+*·/(){},;])")
_PARAM = re.compile(r"[ab]\d+[LP]")


class _TermParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TTOKEN.match(text, pos)
            if m is None:
                raise ValueError(f"bad term syntax at position {pos}: {text!r}")
            self.toks.append(m.group(1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected or 'token'} but found {tok!r} in {self.text!r}")
        self.i += 1
        return tok

    def formulas(self) -> list[TableauFormula]:
        out: list[TableauFormula] = []
        while self.peek() is not None:
            out.extend(self.chain())
            if self.peek() == ";":
                self.take()
        return out

    def chain(self) -> list[TableauFormula]:
        terms, ops = [self.resid()], []
        while self.peek() in ("<=", "<", "="):
            ops.append(self.take())
            terms.append(self.resid())
        if not ops:
            raise ValueError(f"expected a comparison in {self.text!r}")
        cmps = [Cmp(op, a, b) for op, a, b in zip(ops, terms, terms[1:])]
        if self.peek() == "or":
            self.take()
            other = self.chain()
            if len(cmps) != 1 or len(other) != 1:
                raise ValueError("each side of 'or' must be a single comparison")
            return [Disjunct(cmps[0], other[0])]
        return cmps

    def resid(self) -> Term:
        lhs = self.additive()
        if self.peek() == "=>":
            self.take()
            return Resid(lhs, self.resid())
        return lhs

    def additive(self) -> Term:
        t = self.multiplicative()
        while self.peek() in ("+", "-"):
            t = (Add if self.take() == "+" else Sub)(t, self.multiplicative())
        return t

    def multiplicative(self) -> Term:
        t = self.prefix()
        ctor = {"*": TNorm, "·": Mul, "/": Div}
        while self.peek() in ctor:
            t = ctor[self.take()](t, self.prefix())
        return t

    def prefix(self) -> Term:
        tok = self.take()
        if tok == "D":
            return DeltaFn(self.prefix())
        if tok == "(":
            if self.peek() == "-":
                self.take()
                t = Const(-self._number(self.take()))
            else:
                t = self.resid()
            self.take(")")
            return t
        if tok in ("min", "max"):
            self.take("{")
            l = self.resid()
            self.take(",")
            r = self.resid()
            self.take("}")
            return (Min if tok == "min" else Max)(l, r)
        if tok[0].isdigit():
            return Const(self._number(tok))
        m = re.fullmatch(r"c(\d+)([-+])", tok)
        if m:
            return Endpoint(m.group(2), int(m.group(1)))
        if _PARAM.fullmatch(tok):
            return Param(tok)
        if re.fullmatch(r"[A-Za-z_]\w*", tok):
            return Var(tok)
        raise ValueError(f"unexpected token {tok!r} in {self.text!r}")

    @staticmethod
    def _number(tok: str) -> Fraction:
        return Fraction(tok)


def parse_term(text: str) -> Term:
    p = _TermParser(text)
    t = p.resid()
    if p.peek() is not None:
        raise ValueError(f"trailing input in {text!r}")
    return t


def parse_constraints(text: str) -> list[TableauFormula]:
    """Parse ``;``-separated comparisons; chains like ``a <= b < c`` expand pairwise."""
    return _TermParser(text).formulas()
