"""Continuous t-norms as ordinal sums, and evaluation of formulas in them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import formula as F
from .kset import KSet, contains, fmt_rat
from .numeric import Approx, Undetermined, decide, is_exact, le, lt, nmax, nmin


class ModelError(ValueError):
    """The solver handed back parameters that do not form an ordinal sum."""


@dataclass(frozen=True)
class Summand:
    lo: object
    hi: object
    kind: str  # "L" (Lukasiewicz) or "P" (Product)

    def __post_init__(self):
        if self.kind not in ("L", "P"):
            raise ValueError(f"unknown component kind {self.kind!r}")


@dataclass(frozen=True)
class OrdinalSum:
    components: tuple[Summand, ...] = ()

    def __post_init__(self):
        for c in self.components:
            if not decide(le(0, c.lo)) or not decide(lt(c.lo, c.hi)) or not decide(le(c.hi, 1)):
                raise ModelError(f"bad component [{c.lo}, {c.hi}]")
        ordered = sorted(self.components, key=lambda c: _key(c.lo))
        for c, d in zip(ordered, ordered[1:]):
            if not decide(le(c.hi, d.lo)):
                raise ModelError(f"overlapping components [{c.lo},{c.hi}] and [{d.lo},{d.hi}]")

    @classmethod
    def of(cls, *parts: tuple) -> OrdinalSum:
        return cls(tuple(Summand(Fraction(lo), Fraction(hi), kind) for lo, hi, kind in parts))

    def shared(self, x, y) -> Summand | None:
        """The component whose closed interval contains both x and y, if any."""
        for c in self.components:
            if decide(le(c.lo, x)) and decide(le(x, c.hi)) and decide(le(c.lo, y)) and decide(le(y, c.hi)):
                return c
        return None


def _key(v):
    return v.mid if isinstance(v, Approx) else v


MINIMUM = OrdinalSum()


def tnorm_apply(t: OrdinalSum, x, y):
    _check_unit(x, y)
    c = t.shared(x, y)
    if c is None:
        return nmin(x, y)
    if c.kind == "L":
        return nmax(c.lo, x + y - c.hi)
    return c.lo + (x - c.lo) * (y - c.lo) / (c.hi - c.lo)


def residuum_apply(t: OrdinalSum, x, y):
    _check_unit(x, y)
    if decide(le(x, y)):
        return Fraction(1)
    c = t.shared(x, y)
    if c is None:
        return y
    if c.kind == "L":
        return c.hi - x + y
    return c.lo + (y - c.lo) * (c.hi - c.lo) / (x - c.lo)


def _check_unit(*values):
    for v in values:
        if decide(lt(v, 0)) or decide(lt(1, v)):
            raise ValueError(f"truth value {v} outside [0,1]")


@dataclass(frozen=True)
class ExtractedModel:
    tnorm: OrdinalSum
    valuation: dict
    exact: bool = True
    precision: Fraction | None = None

    def as_record(self) -> dict:
        return {
            "components": [{"lo": _fmt(c.lo), "hi": _fmt(c.hi), "kind": c.kind}
                           for c in self.tnorm.components],
            "valuation": {a: _fmt(v) for a, v in sorted(self.valuation.items())},
            "exact": self.exact,
        }


def _fmt(v) -> str:
    return fmt_rat(v.mid if isinstance(v, Approx) else Fraction(v))


def evaluate(f: F.Formula, m: ExtractedModel):
    """Truth value of f under the model's t-norm and valuation."""
    if isinstance(f, F.Atom):
        if f.name not in m.valuation:
            raise KeyError(f"no value for atom {f.name!r}")
        return m.valuation[f.name]
    if isinstance(f, F.Falsum):
        return Fraction(0)
    if isinstance(f, F.Verum):
        return Fraction(1)
    if isinstance(f, F.Inv):
        return 1 - evaluate(f.sub, m)
    if isinstance(f, F.Delta):
        return Fraction(1) if decide(le(1, evaluate(f.sub, m))) else Fraction(0)
    x, y = evaluate(f.lhs, m), evaluate(f.rhs, m)
    if isinstance(f, F.Strong):
        return tnorm_apply(m.tnorm, x, y)
    if isinstance(f, F.Impl):
        return residuum_apply(m.tnorm, x, y)
    if isinstance(f, F.Or):
        return nmax(x, y)
    return nmin(x, y)


def extract_model(sol, chain, m) -> ExtractedModel:
    """Ordinal sum from the chain's parameter values, valuation from the variables."""
    parts = []
    for comp in chain:
        part = Summand(sol.rho[comp.a.name], sol.rho[comp.b.name], comp.label)
        if part not in parts:
            parts.append(part)
    tnorm = OrdinalSum(tuple(sorted(parts, key=lambda c: _key(c.lo))))
    valuation = {atom: sol.sigma[var] for atom, var in m.atom_to_var.items()}
    return ExtractedModel(tnorm, valuation, sol.exact, sol.precision)


def in_kset(k: KSet, v) -> bool | None:
    if is_exact(v):
        return contains(k, v)
    for part in k.parts:
        if v.lo in part and v.hi in part:
            return True
    if not any(v.lo <= p.hi and p.lo <= v.hi for p in k.parts):
        return False
    return None


def check_model(psis: Iterable[F.Formula], k: KSet, m: ExtractedModel) -> list[str]:
    """Reasons the model fails to put every formula's value in k (empty if it succeeds)."""
    problems = []
    for psi in psis:
        try:
            v = evaluate(psi, m)
            member = in_kset(k, v)
        except Undetermined as exc:
            problems.append(f"{F.render_formula(psi)}: undecided at model precision ({exc})")
            continue
        if member is None:
            problems.append(f"{F.render_formula(psi)}: value {_fmt(v)} too close to the boundary of K")
        elif not member:
            problems.append(f"{F.render_formula(psi)}: value {_fmt(v)} not in {k}")
    return problems


def verify_model(psis: Iterable[F.Formula], k: KSet, m: ExtractedModel) -> bool:
    return not check_model(psis, k, m)


def default_pool() -> list[OrdinalSum]:
    half = Fraction(1, 2)
    return [
        MINIMUM,
        OrdinalSum.of((0, 1, "L")),
        OrdinalSum.of((0, 1, "P")),
        OrdinalSum.of((0, half, "L")),
        OrdinalSum.of((half, 1, "P")),
        OrdinalSum.of((0, half, "L"), (half, 1, "P")),
    ]


def grid_oracle(psis: Sequence[F.Formula], k: KSet, denominator: int = 4,
                pool: Sequence[OrdinalSum] | None = None) -> ExtractedModel | None:
    """First pooled t-norm and grid valuation satisfying every formula, else None.

    A brute-force check for tests; None means no witness on this grid, not
    unsatisfiability.
    """
    pool = default_pool() if pool is None else pool
    names = list(dict.fromkeys(a for psi in psis for a in F.atoms(psi)))
    grid = [Fraction(i, denominator) for i in range(denominator + 1)]
    for tnorm in pool:
        for values in itertools.product(grid, repeat=len(names)):
            m = ExtractedModel(tnorm, dict(zip(names, values)))
            if all(contains(k, evaluate(psi, m)) for psi in psis):
                return m
    return None
