"""The K-tableau: root, Split Rule, expansion rules for * => D, and search.

Nodes keep their formulas as an ordered, duplicate-free tuple.  Order is only
used to pick the active term deterministically (substituted formulas keep
their position, new side constraints are appended); node equality in tests
is always set equality.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import formula as F
from .kset import Interval, KSet, complement_intervals
from .model import ExtractedModel, ModelError, check_model, extract_model
from .solver import Backend, ConstraintSet, Sat, SolverConfig, Unsat, open_backend
from .term import (ONE, ZERO, Add, Cmp, DeltaFn, Disjunct, Div, Max, Min, Mul, Param, Resid,
                   Sub, TableauFormula, Term, TNorm, TranslationMap, eta, is_l0, replace_term, show,
                   show_term, substitute, translate)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Component:
    a: Param
    b: Param
    label: str  # "L" or "P"


# Components in chain order: 0 <= a_0 < b_0 <= a_1 < ... < b_{n-1} <= 1.
ComponentChain = tuple[Component, ...]


@dataclass(frozen=True)
class Node:
    formulas: tuple[TableauFormula, ...]
    chain: ComponentChain = ()
    # (psi position, ((eta formula, interval index), ...)) for formulas not yet split
    pending: tuple[tuple[int, tuple[tuple[Disjunct, int], ...]], ...] = ()
    fresh: int = 0
    path: tuple[int, ...] = (1,)
    rule: str = "root"
    case: str = ""
    active: Term | None = None
    added: tuple[TableauFormula, ...] = ()
    # ("star" | "impl", x, y) for every min choice on the branch so far
    separated: tuple[tuple[str, Term, Term], ...] = ()

    @property
    def id(self) -> str:
        return ".".join(map(str, self.path))

    @property
    def is_leaf(self) -> bool:
        return not self.pending and all(is_l0(g) for g in self.formulas)

    def l0_part(self) -> tuple[Cmp, ...]:
        return tuple(g for g in self.formulas if is_l0(g))

    def formula_set(self) -> frozenset:
        return frozenset(self.formulas)


def _dedupe(formulas: Iterable[TableauFormula]) -> tuple[TableauFormula, ...]:
    return tuple(dict.fromkeys(formulas))


# -- root and Split Rule ----------------------------------------------------

def build_root(psis: Sequence[F.Formula], k: KSet, m: TranslationMap,
               complement: list[Interval] | None = None) -> Node:
    if complement is None:
        complement = complement_intervals(k)
    formulas, pending = [], []
    for pos, psi in enumerate(psis):
        t = translate(psi, m)
        etas = tuple((eta(t, j, i), i) for i, j in enumerate(complement, start=1))
        formulas.extend(e for e, _ in etas)
        if etas:
            pending.append((pos, etas))
    return Node(_dedupe(formulas), pending=tuple(pending))


def split_children(n: Node) -> list[Node]:
    """One child per subset S of the index set, for the first unsplit formula.

    Children are ordered with the lowest interval index varying fastest and
    "inside S" (the lower disjunct) first, so for two intervals the order is
    S = {1,2}, {2}, {1}, {}.
    """
    if not n.pending:
        raise ValueError("node has no pending splits")
    pos, etas = n.pending[0]
    removed = {e for e, _ in etas}
    rest = [g for g in n.formulas if g not in removed]
    children = []
    for k, combo in enumerate(itertools.product((True, False), repeat=len(etas)), start=1):
        in_s = combo[::-1]
        chosen = [e.lhs if lower else e.rhs for (e, _), lower in zip(etas, in_s)]
        subset = sorted(i for (_, i), lower in zip(etas, in_s) if lower)
        children.append(Node(
            _dedupe(rest + chosen), n.chain, n.pending[1:], n.fresh, n.path + (k,),
            "split", "S={" + ",".join(map(str, subset)) + "}", None, tuple(chosen), n.separated))
    return children


# -- active term -----------------------------------------------------------

_INFIX = (Add, Sub, Mul, Div, TNorm, Resid)


def _leftmost(t: Term) -> tuple[Term | None, bool]:
    """Interpreted subterm whose text starts leftmost, ties going to the innermost.

    The flag says whether the result starts where ``t`` itself starts.
    """
    if isinstance(t, DeltaFn):
        return t, True
    if isinstance(t, _INFIX):
        inner, at_start = _leftmost(t.l)
        if inner is not None and at_start:
            return inner, True
        if isinstance(t, (TNorm, Resid)):
            return t, True
        if inner is not None:
            return inner, False
        return _leftmost(t.r)[0], False
    if isinstance(t, (Min, Max)):
        inner = _leftmost(t.l)[0] or _leftmost(t.r)[0]
        return inner, False
    return None, False


def active_in(g: TableauFormula) -> Term | None:
    if isinstance(g, Disjunct):
        return active_in(g.lhs) or active_in(g.rhs)
    return _leftmost(g.lhs)[0] or _leftmost(g.rhs)[0]


def select_active(n: Node) -> Term | None:
    if n.pending:
        raise ValueError("active terms are chosen only after all splits")
    for g in n.formulas:
        t = active_in(g)
        if t is not None:
            return t
    return None


# -- cases -----------------------------------------------------------------

def _le(x, y):
    return Cmp("<=", x, y)


def _lt(x, y):
    return Cmp("<", x, y)


@dataclass(frozen=True)
class Placement:
    """A way of putting x, y in one component: the pair (a, b) and its constraints."""
    case: str
    a: Param
    b: Param
    constraints: tuple[Cmp, ...]
    chain: ComponentChain


def component_cases(chain: ComponentChain, label: str, fresh: int) -> list[Placement]:
    """Cases 1-4 (or 10 on an empty chain) for a component labelled ``label``.

    ``fresh`` numbers the new parameter pair a{fresh}{label}, b{fresh}{label}.
    Case 2 keeps the new pair as an alias of an existing component, so the
    chain does not grow.
    """
    a, b = Param(f"a{fresh}{label}"), Param(f"b{fresh}{label}")
    new = Component(a, b, label)
    n = len(chain)
    if n == 0:
        return [Placement("10", a, b, (_le(ZERO, a), _lt(a, b), _le(b, ONE)), (new,))]
    out = [Placement("1", a, b, (_le(ZERO, a), _lt(a, b), _le(b, chain[0].a)), (new,) + chain)]
    for i, c in enumerate(chain):
        if c.label == label:
            out.append(Placement("2", a, b, (Cmp("=", c.a, a), _lt(a, b), Cmp("=", b, c.b)), chain))
    for i in range(n - 1):
        out.append(Placement("3", a, b, (_le(chain[i].b, a), _lt(a, b), _le(b, chain[i + 1].a)),
                             chain[:i + 1] + (new,) + chain[i + 1:]))
    out.append(Placement("4", a, b, (_le(chain[-1].b, a), _lt(a, b), _le(b, ONE)), chain + (new,)))
    return out


def separation_cases(chain: ComponentChain, x: Term, y: Term) -> list[tuple[str, tuple[Cmp, ...]]]:
    """Cases 5-9 (or 11 on an empty chain): x and y share no component."""
    n = len(chain)
    if n == 0:
        return [("11", ())]
    out = [("5", (_le(ZERO, x), _le(x, chain[0].a)))]
    out += [("6", (_le(c.a, x), _le(x, c.b), _le(y, c.a))) for c in chain]
    out += [("7", (_le(c.a, x), _le(x, c.b), _le(c.b, y))) for c in chain]
    out += [("8", (_le(chain[i].b, x), _le(x, chain[i + 1].a))) for i in range(n - 1)]
    out.append(("9", (_le(chain[-1].b, x), _le(x, ONE))))
    return out


# -- expansion -------------------------------------------------------------

def separation(kind: str, x: Term, y: Term, a: Param, b: Param) -> Disjunct:
    """x and y do not meet inside the component [a, b] (touching its ends is harmless).

    For * the values agree at both ends; for => (where y < x) a Lukasiewicz
    component still changes the value at y = a, so that end is strict.
    """
    if kind == "star":
        return Disjunct(_le(Min(x, y), a), _le(b, Max(x, y)))
    return Disjunct(_lt(y, a), _le(b, x))


def _child(n: Node, k: int, t: Term, replacement: Term, added: Sequence[Cmp], rule: str,
           case: str, chain: ComponentChain | None = None, fresh: int | None = None,
           new: Component | None = None, record: tuple | None = None) -> Node:
    formulas = [substitute(g, replacement, t) for g in n.formulas] + list(added)
    separated = tuple((kind, replace_term(x, replacement, t), replace_term(y, replacement, t))
                      for kind, x, y in n.separated)
    pending = ()
    if new is not None and separated:
        # earlier min choices must stay outside the component created here
        seps = [separation(kind, x, y, new.a, new.b) for kind, x, y in separated]
        formulas += seps
        pending = tuple((-1, ((d, 1),)) for d in dict.fromkeys(seps))
    if record is not None:
        separated += (record,)
    return Node(_dedupe(formulas), n.chain if chain is None else chain, pending,
                n.fresh if fresh is None else fresh, n.path + (k,), rule, case, t, tuple(added),
                separated)


def _lukasiewicz_tnorm(x, y, a, b):
    return Max(a, Sub(Add(x, y), b))


def _product_tnorm(x, y, a, b):
    return Add(a, Div(Mul(Sub(x, a), Sub(y, a)), Sub(b, a)))


def _lukasiewicz_resid(x, y, a, b):
    return Add(Sub(b, x), y)


def _product_resid(x, y, a, b):
    return Add(a, Div(Mul(Sub(y, a), Sub(b, a)), Sub(x, a)))


def expand(n: Node) -> list[Node]:
    """Children of a non-leaf node, in rule order (All, L, P, min; D1, D2)."""
    if n.pending:
        return split_children(n)
    t = select_active(n)
    if t is None:
        raise ValueError("cannot expand a leaf")
    specs: list[tuple] = []
    if isinstance(t, DeltaFn):
        x = t.sub
        specs.append((ONE, [_le(ONE, x)], "delta.1", "", None, None, None, None))
        specs.append((ZERO, [_lt(x, ONE)], "delta.2", "", None, None, None, None))
    else:
        x, y = t.l, t.r
        star = isinstance(t, TNorm)
        kind = "star" if star else "impl"
        if not star:
            specs.append((ONE, [_le(x, y)], "impl.all", "", None, None, None, None))
        for label, make in (("L", _lukasiewicz_tnorm if star else _lukasiewicz_resid),
                            ("P", _product_tnorm if star else _product_resid)):
            for pl in component_cases(n.chain, label, n.fresh):
                a, b = pl.a, pl.b
                if star:
                    side = [_le(a, x), _le(x, b), _le(a, y), _le(y, b)]
                else:
                    side = [_le(a, y), _lt(y, x), _le(x, b)]
                new = None if pl.case == "2" else Component(a, b, label)
                specs.append((make(x, y, a, b), list(pl.constraints) + side,
                              f"{kind}.{label}", pl.case, pl.chain, n.fresh + 1, new, None))
        for case, j in separation_cases(n.chain, x, y):
            if star:
                specs.append((Min(x, y), list(j), "star.min", case, None, None, None, ("star", x, y)))
            else:
                specs.append((y, list(j) + [_lt(y, x)], "impl.min", case, None, None, None,
                              ("impl", x, y)))
    return [_child(n, k, t, *spec) for k, spec in enumerate(specs, start=1)]


# -- search ----------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    parent: str
    child: str
    rule: str
    case: str
    active: str
    added: tuple[str, ...]

    def as_record(self) -> dict:
        return {"parent": self.parent, "child": self.child, "rule": self.rule,
                "case": self.case, "active": self.active, "added": list(self.added)}


def edge_of(parent: Node, child: Node) -> Edge:
    return Edge(parent.id, child.id, child.rule, child.case,
                show_term(child.active) if child.active is not None else "",
                tuple(show(g) for g in child.added))


@dataclass
class Stats:
    nodes: int = 0
    leaves: int = 0
    solver_calls: int = 0
    pruned: int = 0
    elapsed_ms: int = 0

    def as_dict(self) -> dict:
        return {"nodes": self.nodes, "leaves": self.leaves,
                "solver_calls": self.solver_calls, "elapsed_ms": self.elapsed_ms}


@dataclass(frozen=True)
class Satisfiable:
    model: ExtractedModel
    leaf: Node
    trace: tuple[Edge, ...]
    stats: Stats = field(default_factory=Stats, compare=False)


@dataclass(frozen=True)
class Unsatisfiable:
    stats: Stats = field(default_factory=Stats, compare=False)


@dataclass(frozen=True)
class Unknown:
    reasons: tuple[str, ...]
    stats: Stats = field(default_factory=Stats, compare=False)


Verdict = Satisfiable | Unsatisfiable | Unknown


@dataclass
class ExploreConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    prune: bool = True
    max_nodes: int | None = 50_000
    on_edge: Callable[[Edge], None] | None = None


class _Search:
    def __init__(self, psis, k: KSet, config: ExploreConfig, backend: Backend):
        self.psis = list(psis)
        self.k = k
        self.config = config
        self.backend = backend
        self.complement = complement_intervals(k)
        self.m = TranslationMap()
        for psi in self.psis:
            for atom in F.atoms(psi):
                self.m.var(atom)
        self.stats = Stats()
        self.undecided: list[str] = []
        self.exhausted = False

    def check(self, formulas) -> object:
        self.stats.solver_calls += 1
        return self.backend.check(ConstraintSet.of(formulas, self.complement))

    def run(self) -> Verdict:
        root = build_root(self.psis, self.k, self.m, self.complement)
        found = self.visit(root, None, ())
        if found is not None:
            return found
        if self.undecided or self.exhausted:
            reasons = list(self.undecided)
            if self.exhausted:
                reasons.append(f"node budget of {self.config.max_nodes} exhausted")
            return Unknown(tuple(reasons), self.stats)
        return Unsatisfiable(self.stats)

    def visit(self, n: Node, parent: Node | None, trace: tuple[Edge, ...]) -> Satisfiable | None:
        if self.config.max_nodes is not None and self.stats.nodes >= self.config.max_nodes:
            self.exhausted = True
            return None
        self.stats.nodes += 1
        if parent is not None:
            edge = edge_of(parent, n)
            trace = trace + (edge,)
            if self.config.on_edge is not None:
                self.config.on_edge(edge)
        if n.is_leaf:
            return self.at_leaf(n, trace)
        if self.config.prune and parent is not None and any(is_l0(g) for g in n.added):
            if isinstance(self.check(n.l0_part()), Unsat):
                self.stats.pruned += 1
                return None
        for child in expand(n):
            found = self.visit(child, n, trace)
            if found is not None or self.exhausted:
                return found
        return None

    def at_leaf(self, n: Node, trace) -> Satisfiable | None:
        self.stats.leaves += 1
        result = self.check(n.formulas)
        if isinstance(result, Unsat):
            return None
        if not isinstance(result, Sat):
            self.undecided.append(f"leaf {n.id}: {result.reason}")
            return None
        sigma = dict(result.solution.sigma)
        for var in self.m.atom_to_var.values():
            sigma.setdefault(var, 0)
        sol = result.solution.with_sigma(sigma)
        try:
            model = extract_model(sol, n.chain, self.m)
        except ModelError as exc:
            self.undecided.append(f"leaf {n.id}: extraction failed: {exc}")
            return None
        problems = check_model(self.psis, self.k, model)
        if problems:
            log.warning("leaf %s: extracted model rejected: %s", n.id, "; ".join(problems))
            self.undecided.append(f"leaf {n.id}: model not verified: {'; '.join(problems)}")
            return None
        return Satisfiable(model, n, trace, self.stats)


def explore(psis: Sequence[F.Formula], k: KSet, config: ExploreConfig | None = None) -> Verdict:
    """Depth-first search of the K-tableau for the first open branch."""
    config = config or ExploreConfig()
    start = time.perf_counter()
    with open_backend(config.solver) as backend:
        search = _Search(psis, k, config, backend)
        verdict = search.run()
    search.stats.elapsed_ms = int((time.perf_counter() - start) * 1000)
    return verdict


def describe(n: Node) -> str:
    lines = [f"({n.id}) {n.rule} {n.case}".rstrip()]
    lines += ["  " + show(g) for g in n.formulas]
    return "\n".join(lines)


__all__ = [
    "Component", "ComponentChain", "Node", "Placement", "build_root", "split_children",
    "select_active", "component_cases", "separation_cases", "expand", "explore",
    "ExploreConfig", "Satisfiable", "Unsatisfiable", "Unknown", "Verdict", "Edge", "Stats",
]
