"""Weak/strong r-satisfiability and consistency-degree brackets."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import formula as F
from .kset import Interval, KSet, fmt_rat
from .tableau import ExploreConfig, Satisfiable, Unsatisfiable, Verdict, explore


def _rational(r) -> Fraction:
    r = Fraction(r)
    if not 0 <= r <= 1:
        raise ValueError(f"r = {r} outside [0,1]")
    return r


def weak_r_sat(psis: Sequence[F.Formula], r, config: ExploreConfig | None = None) -> Verdict:
    """K = [r, 1]."""
    r = _rational(r)
    return explore(psis, KSet((Interval(r, Fraction(1)),)), config)


def strong_r_sat(psis: Sequence[F.Formula], r, config: ExploreConfig | None = None) -> Verdict:
    """K = {r}."""
    r = _rational(r)
    return explore(psis, KSet((Interval(r, r),)), config)


@dataclass(frozen=True)
class DegreeBracket:
    """The supremum of satisfiable r lies in [lo, hi].

    ``lo`` itself was shown satisfiable.  ``attained`` is True when the
    supremum is known to be satisfiable, None when that is open.
    ``complete`` is False when an Unknown verdict stopped the search early;
    ``monotone`` is False in strong mode, where bisection is only a heuristic.
    """
    mode: str
    lo: Fraction
    hi: Fraction
    attained: bool | None
    complete: bool
    monotone: bool
    steps: int

    def __contains__(self, r) -> bool:
        return self.lo <= r <= self.hi

    def as_record(self) -> dict:
        return {"mode": self.mode, "lo": fmt_rat(self.lo), "hi": fmt_rat(self.hi),
                "attained": self.attained, "complete": self.complete, "monotone": self.monotone}


def consistency_degree(psis: Sequence[F.Formula], mode: str, tol,
                       config: ExploreConfig | None = None) -> DegreeBracket:
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if mode not in ("weak", "strong"):
        raise ValueError(f"mode must be 'weak' or 'strong', not {mode!r}")
    probe = weak_r_sat if mode == "weak" else strong_r_sat
    monotone = mode == "weak"
    steps = 1

    def bracket(lo, hi, attained, complete):
        return DegreeBracket(mode, lo, hi, attained, complete, monotone, steps)

    top = probe(psis, 1, config)
    if isinstance(top, Satisfiable):
        return bracket(Fraction(1), Fraction(1), True, True)
    if not isinstance(top, Unsatisfiable):
        return bracket(Fraction(0), Fraction(1), None, False)
    lo, hi = Fraction(0), Fraction(1)
    if mode == "strong":
        steps += 1
        bottom = probe(psis, 0, config)
        if isinstance(bottom, Unsatisfiable):
            # no satisfiable r found at either end; bisection has nothing to anchor on
            return bracket(lo, hi, None, False)
        if not isinstance(bottom, Satisfiable):
            return bracket(lo, hi, None, False)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        steps += 1
        v = probe(psis, mid, config)
        if isinstance(v, Satisfiable):
            lo = mid
        elif isinstance(v, Unsatisfiable):
            hi = mid
        else:
            return bracket(lo, hi, None, False)
    return bracket(lo, hi, None, True)
