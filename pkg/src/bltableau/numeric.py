"""Exact rationals and rational enclosures of approximate reals.

Values are either ``Fraction`` (exact) or ``Approx`` (a closed interval known
to contain the true value).  Comparisons return ``True``, ``False`` or
``None`` when an enclosure cannot decide them.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class Undetermined(ArithmeticError):
    """An enclosure straddles a decision boundary."""


@dataclass(frozen=True)
class Approx:
    lo: Fraction
    hi: Fraction

    @classmethod
    def around(cls, centre, radius) -> Approx:
        centre, radius = Fraction(centre), Fraction(radius)
        return cls(centre - radius, centre + radius)

    def __add__(self, other):
        o = _enclose(other)
        return Approx(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Approx(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_enclose(other))

    def __rsub__(self, other):
        return _enclose(other) - self

    def __mul__(self, other):
        o = _enclose(other)
        ends = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi]
        return Approx(min(ends), max(ends))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _enclose(other)
        if o.lo <= 0 <= o.hi:
            raise Undetermined("division by an enclosure containing zero")
        return self * Approx(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        return _enclose(other) / self

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2


Number = Union[Fraction, Approx]


def _enclose(v) -> Approx:
    if isinstance(v, Approx):
        return v
    v = Fraction(v)
    return Approx(v, v)


def is_exact(v) -> bool:
    return not isinstance(v, Approx)


def le(a, b) -> bool | None:
    if is_exact(a) and is_exact(b):
        return a <= b
    a, b = _enclose(a), _enclose(b)
    if a.hi <= b.lo:
        return True
    if a.lo > b.hi:
        return False
    return None


def lt(a, b) -> bool | None:
    if is_exact(a) and is_exact(b):
        return a < b
    a, b = _enclose(a), _enclose(b)
    if a.hi < b.lo:
        return True
    if a.lo >= b.hi:
        return False
    return None


def eq(a, b) -> bool | None:
    if is_exact(a) and is_exact(b):
        return a == b
    a, b = _enclose(a), _enclose(b)
    if a.hi < b.lo or b.hi < a.lo:
        return False
    if a.lo == a.hi == b.lo == b.hi:
        return True
    return None


def decide(flag: bool | None) -> bool:
    if flag is None:
        raise Undetermined("comparison undecided at the available precision")
    return flag


def nmin(a, b):
    if is_exact(a) and is_exact(b):
        return min(a, b)
    a, b = _enclose(a), _enclose(b)
    return Approx(min(a.lo, b.lo), min(a.hi, b.hi))


def nmax(a, b):
    if is_exact(a) and is_exact(b):
        return max(a, b)
    a, b = _enclose(a), _enclose(b)
    return Approx(max(a.lo, b.lo), max(a.hi, b.hi))


def is_zero(v) -> bool | None:
    return eq(v, Fraction(0))
