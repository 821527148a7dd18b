"""Interval constraint propagation over L0 comparisons.

Every symbol starts in [0,1]; comparisons narrow the box by forward
evaluation and backward projection through + - min max.  Narrowing only ever
removes points that violate some comparison, so an empty box is a proof of
unsatisfiability.  ``None`` bounds stand for minus/plus infinity.
"""
from __future__ import annotations

from fractions import Fraction

from .term import Add, Cmp, Const, Div, Endpoint, Max, Min, Mul, Param, Sub, Var

Bound = Fraction | None
Ival = tuple[Bound, Bound]

TOP: Ival = (None, None)


class Refuted(Exception):
    pass


def _add(a: Ival, b: Ival) -> Ival:
    lo = None if a[0] is None or b[0] is None else a[0] + b[0]
    hi = None if a[1] is None or b[1] is None else a[1] + b[1]
    return lo, hi


def _neg(a: Ival) -> Ival:
    return (None if a[1] is None else -a[1], None if a[0] is None else -a[0])


def _sub(a: Ival, b: Ival) -> Ival:
    return _add(a, _neg(b))


def _bounded(a: Ival) -> bool:
    return a[0] is not None and a[1] is not None


def _mul(a: Ival, b: Ival) -> Ival:
    if not (_bounded(a) and _bounded(b)):
        return TOP
    ends = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(ends), max(ends)


def _div(a: Ival, b: Ival) -> Ival:
    if b == (0, 0):
        return (Fraction(0), Fraction(0))
    if b[0] is None or b[1] is None or b[0] <= 0 <= b[1]:
        return TOP
    return _mul(a, (1 / b[1], 1 / b[0]))


def _lo_min(x: Bound, y: Bound) -> Bound:
    return None if x is None or y is None else min(x, y)


def _hi_min(x: Bound, y: Bound) -> Bound:
    if x is None:
        return y
    if y is None:
        return x
    return min(x, y)


def _lo_max(x: Bound, y: Bound) -> Bound:
    if x is None:
        return y
    if y is None:
        return x
    return max(x, y)


def _hi_max(x: Bound, y: Bound) -> Bound:
    return None if x is None or y is None else max(x, y)


def _meet(a: Ival, b: Ival) -> Ival:
    out = (_lo_max(a[0], b[0]), _hi_min(a[1], b[1]))
    if out[0] is not None and out[1] is not None and out[0] > out[1]:
        raise Refuted
    return out


class Propagator:
    def __init__(self, atoms, endpoints: dict | None = None):
        self.atoms = list(atoms)
        self.endpoints = endpoints or {}
        self.box: dict[str, Ival] = {}
        for g in self.atoms:
            for t in (g.lhs, g.rhs):
                self._declare(t)
        self.changed = False

    def _declare(self, t):
        if isinstance(t, (Var, Param)):
            self.box.setdefault(t.name, (Fraction(0), Fraction(1)))
        elif hasattr(t, "l"):
            self._declare(t.l)
            self._declare(t.r)

    def forward(self, t, memo: dict) -> Ival:
        if t in memo:
            return memo[t]
        if isinstance(t, (Var, Param)):
            v = self.box[t.name]
        elif isinstance(t, Const):
            v = (t.value, t.value)
        elif isinstance(t, Endpoint):
            e = self.endpoints[(t.which, t.index)]
            v = (e, e)
        else:
            l, r = self.forward(t.l, memo), self.forward(t.r, memo)
            if isinstance(t, Add):
                v = _add(l, r)
            elif isinstance(t, Sub):
                v = _sub(l, r)
            elif isinstance(t, Mul):
                v = _mul(l, r)
            elif isinstance(t, Div):
                v = _div(l, r)
            elif isinstance(t, Min):
                v = (_lo_min(l[0], r[0]), _hi_min(l[1], r[1]))
            elif isinstance(t, Max):
                v = (_lo_max(l[0], r[0]), _hi_max(l[1], r[1]))
            else:
                raise ValueError(f"not an L0 term: {t!r}")
        memo[t] = v
        return v

    def narrow(self, t, target: Ival, memo: dict):
        cur = self.forward(t, memo)
        new = _meet(cur, target)
        if new == cur:
            return
        if isinstance(t, (Var, Param)):
            self.box[t.name] = new
            self.changed = True
            memo[t] = new
            return
        if isinstance(t, (Const, Endpoint)):
            return
        l, r = memo[t.l], memo[t.r]
        if isinstance(t, Add):
            self.narrow(t.l, _sub(new, r), memo)
            self.narrow(t.r, _sub(new, l), memo)
        elif isinstance(t, Sub):
            self.narrow(t.l, _add(new, r), memo)
            self.narrow(t.r, _sub(l, new), memo)
        elif isinstance(t, Min):
            self.narrow(t.l, (new[0], None), memo)
            self.narrow(t.r, (new[0], None), memo)
            if r[0] is not None and new[1] is not None and r[0] > new[1]:
                self.narrow(t.l, (None, new[1]), memo)
            if l[0] is not None and new[1] is not None and l[0] > new[1]:
                self.narrow(t.r, (None, new[1]), memo)
        elif isinstance(t, Max):
            self.narrow(t.l, (None, new[1]), memo)
            self.narrow(t.r, (None, new[1]), memo)
            if r[1] is not None and new[0] is not None and r[1] < new[0]:
                self.narrow(t.l, (new[0], None), memo)
            if l[1] is not None and new[0] is not None and l[1] < new[0]:
                self.narrow(t.r, (new[0], None), memo)

    def revise(self, g: Cmp):
        memo: dict = {}
        if g.op == "<" and g.lhs == g.rhs:
            raise Refuted
        l, r = self.forward(g.lhs, memo), self.forward(g.rhs, memo)
        if g.op == "=":
            both = _meet(l, r)
            self.narrow(g.lhs, both, memo)
            memo = {}
            self.narrow(g.rhs, both, memo)
            return
        if l[0] is not None and r[1] is not None:
            if l[0] > r[1] or (g.op == "<" and l[0] >= r[1]):
                raise Refuted
        self.narrow(g.lhs, (None, r[1]), memo)
        memo = {}
        l = self.forward(g.lhs, memo)
        self.narrow(g.rhs, (l[0], None), memo)

    def run(self, rounds: int = 12) -> dict[str, Ival] | None:
        try:
            for _ in range(rounds):
                self.changed = False
                for g in self.atoms:
                    self.revise(g)
                if not self.changed:
                    break
            # final pass detects conflicts among the narrowed bounds
            for g in self.atoms:
                self.revise(g)
        except Refuted:
            return None
        return self.box


def propagate(atoms, endpoints: dict | None = None, rounds: int = 12) -> dict[str, Ival] | None:
    """Narrowed box for the symbols of ``atoms``, or None if they are refuted."""
    return Propagator(atoms, endpoints).run(rounds)
