"""Truth-value sets as finite unions of rational-endpoint intervals."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction


class KSetSyntaxError(ValueError):
    pass


def fmt_rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not 0 <= self.lo <= self.hi <= 1:
            raise ValueError(f"interval endpoints must satisfy 0 <= lo <= hi <= 1: {self}")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError(f"empty interval: {self}")

    def __contains__(self, v) -> bool:
        above = v > self.lo or (self.lo_closed and v == self.lo)
        below = v < self.hi or (self.hi_closed and v == self.hi)
        return above and below

    def __str__(self) -> str:
        if self.lo == self.hi:
            return "{" + fmt_rat(self.lo) + "}"
        return (("[" if self.lo_closed else "(") + fmt_rat(self.lo) + "," + fmt_rat(self.hi)
                + ("]" if self.hi_closed else ")"))


def _touches(a: Interval, b: Interval) -> bool:
    """Whether a and b (a.lo <= b.lo) overlap or abut so their union is an interval."""
    return a.hi > b.lo or (a.hi == b.lo and (a.hi_closed or b.lo_closed))


def _union(a: Interval, b: Interval) -> Interval:
    if a.lo < b.lo:
        lo, lo_closed = a.lo, a.lo_closed
    elif b.lo < a.lo:
        lo, lo_closed = b.lo, b.lo_closed
    else:
        lo, lo_closed = a.lo, a.lo_closed or b.lo_closed
    if a.hi > b.hi:
        hi, hi_closed = a.hi, a.hi_closed
    elif b.hi > a.hi:
        hi, hi_closed = b.hi, b.hi_closed
    else:
        hi, hi_closed = a.hi, a.hi_closed or b.hi_closed
    return Interval(lo, hi, lo_closed, hi_closed)


@dataclass(frozen=True)
class KSet:
    """Canonical union: parts sorted, pairwise disjoint, never adjacent."""
    parts: tuple[Interval, ...] = ()

    @classmethod
    def of(cls, intervals) -> KSet:
        ordered = sorted(intervals, key=lambda j: (j.lo, not j.lo_closed))
        merged: list[Interval] = []
        for j in ordered:
            if merged and _touches(merged[-1], j):
                merged[-1] = _union(merged[-1], j)
            else:
                merged.append(j)
        return cls(tuple(merged))

    def __str__(self) -> str:
        return " u ".join(str(j) for j in self.parts) if self.parts else "{}"

    def __contains__(self, v) -> bool:
        return contains(self, v)


_ITEM = re.compile(r"\s*(?:\{\s*(?P<pt>[^{}\s,]+)\s*\}|(?P<l>[\[(])\s*(?P<lo>[^,\s]+)\s*,\s*(?P<hi>[^\])\s]+)\s*(?P<r>[\])]))\s*")


def _rat(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except ValueError:
        raise KSetSyntaxError(f"not a rational number: {text!r}") from None
    if not 0 <= q <= 1:
        raise KSetSyntaxError(f"endpoint {text} outside [0,1]")
    return q


def parse_kset(text: str) -> KSet:
    """Parse e.g. ``"[1/2,3/4] u {1}"``; ``"{}"`` is the empty set."""
    if text.strip() == "{}":
        return KSet()
    items = []
    pos = 0
    while True:
        m = _ITEM.match(text, pos)
        if m is None:
            raise KSetSyntaxError(f"bad interval at position {pos}: {text!r}")
        if m.group("pt") is not None:
            v = _rat(m.group("pt"))
            items.append(Interval(v, v))
        else:
            lo, hi = _rat(m.group("lo")), _rat(m.group("hi"))
            lo_closed, hi_closed = m.group("l") == "[", m.group("r") == "]"
            if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
                raise KSetSyntaxError(f"empty interval {m.group(0).strip()!r}")
            items.append(Interval(lo, hi, lo_closed, hi_closed))
        pos = m.end()
        if pos == len(text):
            break
        sep = re.compile(r"u(?=\s|[\[({])").match(text, pos)
        if sep is None:
            raise KSetSyntaxError(f"expected 'u' at position {pos}: {text!r}")
        pos = sep.end()
    return KSet.of(items)


def complement_intervals(k: KSet) -> list[Interval]:
    """Maximal disjoint subintervals covering [0,1] minus k, ascending."""
    gaps = []
    cur, cur_closed = Fraction(0), True
    for part in k.parts:
        hi_closed = not part.lo_closed
        if cur < part.lo or (cur == part.lo and cur_closed and hi_closed):
            gaps.append(Interval(cur, part.lo, cur_closed, hi_closed))
        cur, cur_closed = part.hi, not part.hi_closed
    if cur < 1 or (cur == 1 and cur_closed):
        gaps.append(Interval(cur, Fraction(1), cur_closed, True))
    return gaps


def contains(k: KSet, v) -> bool:
    if not 0 <= v <= 1:
        raise ValueError(f"truth value {v} outside [0,1]")
    return any(v in part for part in k.parts)
