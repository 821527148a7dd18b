import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from bltableau.formula import parse_formula
from bltableau.kset import Interval
from bltableau.term import (ONE, ZERO, Add, Cmp, Const, DeltaFn, Disjunct, Div, Endpoint, Max, Min,
                            Mul, Param, Resid, Sub, TNorm, TranslationMap, Var, eta,
                            evaluate_term, holds, interpreted_subterms, is_l0, parse_constraints,
                            parse_term, show, show_term, substitute, subterms, translate)

mu_p, mu_q, mu_r = Var("mu_p"), Var("mu_q"), Var("mu_r")
half = Const(Fraction(1, 2))


def test_translate_examples():
    m = TranslationMap()
    assert translate(parse_formula("1 -> p & r"), m) == Resid(ONE, TNorm(mu_p, mu_r))
    assert translate(parse_formula("D r -> p \\/ q"), m) == Resid(DeltaFn(mu_r), Max(mu_p, mu_q))
    assert translate(parse_formula("~p"), m) == Sub(ONE, mu_p)
    assert translate(parse_formula("0"), m) == ZERO
    assert translate(parse_formula("p /\\ q"), m) == Min(mu_p, mu_q)
    assert m.atom_to_var == {"p": "mu_p", "r": "mu_r", "q": "mu_q"}
    assert m.atom_of("mu_q") == "q"


def test_translation_map_is_stable_and_injective():
    m = TranslationMap()
    assert m.var("p") == m.var("p")
    assert len({m.var(a) for a in ("p", "q", "p_1", "pq")}) == 4


def test_eta_strictness():
    t = Var("t")
    assert eta(t, Interval(0, Fraction(1, 2), True, False), 1) == \
        Disjunct(Cmp("<", t, Endpoint("-", 1)), Cmp("<=", Endpoint("+", 1), t))
    assert eta(t, Interval(Fraction(3, 4), 1, False, False), 2) == \
        Disjunct(Cmp("<=", t, Endpoint("-", 2)), Cmp("<=", Endpoint("+", 2), t))
    assert eta(t, Interval(0, 1), 3) == \
        Disjunct(Cmp("<", t, Endpoint("-", 3)), Cmp("<", Endpoint("+", 3), t))


def test_eta_correctness_on_random_pairs():
    rng = random.Random(11)
    for _ in range(500):
        v = Fraction(rng.randint(0, 12), 12)
        lo, hi = sorted(Fraction(rng.randint(0, 12), 12) for _ in range(2))
        closed = (True, True) if lo == hi else (rng.random() < 0.5, rng.random() < 0.5)
        j = Interval(lo, hi, *closed)
        g = eta(Const(v), j, 1)
        ends = {("-", 1): j.lo, ("+", 1): j.hi}
        outside = holds(g.lhs, {}, ends) or holds(g.rhs, {}, ends)
        assert outside == (v not in j)


def test_substitute_examples():
    t = Resid(ONE, TNorm(mu_p, mu_r))
    g = Cmp("<=", t, Const(Fraction(3, 4)))
    assert substitute(g, ONE, t) == Cmp("<=", ONE, Const(Fraction(3, 4)))
    star = TNorm(mu_p, mu_r)
    repl = Max(Param("a1L"), Sub(Add(mu_p, mu_r), Param("b1L")))
    [before] = parse_constraints("a0L <= mu_p * mu_r")
    assert substitute(before, repl, star) == Cmp("<=", Param("a0L"), repl)
    untouched = Cmp("<=", mu_q, ONE)
    assert substitute(untouched, ONE, star) is untouched


def test_substitute_reaches_into_disjuncts_and_delta():
    g = Disjunct(Cmp("<", DeltaFn(mu_r), ZERO), Cmp("<=", half, Resid(DeltaFn(mu_r), mu_p)))
    out = substitute(g, ONE, DeltaFn(mu_r))
    assert out == Disjunct(Cmp("<", ONE, ZERO), Cmp("<=", half, Resid(ONE, mu_p)))


def test_interpreted_subterms():
    m = TranslationMap()
    root = [Cmp("<", translate(parse_formula("1 -> p & r"), m), ZERO),
            Cmp("<=", translate(parse_formula("D r -> p \\/ q"), m), ONE)]
    assert interpreted_subterms(root) == {
        TNorm(mu_p, mu_r), Resid(ONE, TNorm(mu_p, mu_r)), DeltaFn(mu_r),
        Resid(DeltaFn(mu_r), Max(mu_p, mu_q))}
    assert interpreted_subterms(parse_constraints("mu_p + mu_q <= 1; a0L < b0L")) == set()
    xy = TNorm(Var("x"), Var("y"))
    assert interpreted_subterms([Cmp("<=", xy, xy)]) == {xy}


def test_division_by_zero_is_zero():
    assert evaluate_term(Div(ONE, ZERO), {}) == 0
    assert evaluate_term(Div(mu_p, Sub(mu_q, mu_q)), {"mu_p": Fraction(1, 3), "mu_q": half.value}) == 0
    assert evaluate_term(Div(ONE, Const(Fraction(4))), {}) == Fraction(1, 4)


def test_constraint_chains_expand_pairwise():
    gs = parse_constraints("a0L <= mu_q < mu_p <= b0L")
    assert gs == [Cmp("<=", Param("a0L"), mu_q), Cmp("<", mu_q, mu_p), Cmp("<=", mu_p, Param("b0L"))]


def test_is_l0():
    assert is_l0(Cmp("<=", Add(mu_p, Div(mu_q, Param("a0L"))), Endpoint("+", 1)))
    assert not is_l0(Cmp("<=", Max(mu_p, DeltaFn(mu_q)), ONE))
    assert not is_l0(Disjunct(Cmp("<", mu_p, ZERO), Cmp("<", ONE, mu_p)))


# -- random terms -----------------------------------------------------------

leaf_terms = st.one_of(
    st.sampled_from([mu_p, mu_q, mu_r, Param("a0L"), Param("b1P"), Endpoint("-", 1),
                     Endpoint("+", 2)]),
    st.builds(lambda n, d: Const(Fraction(n, d)), st.integers(0, 5), st.integers(1, 5)),
)
terms = st.recursive(leaf_terms, lambda c: st.one_of(
    st.builds(Add, c, c), st.builds(Sub, c, c), st.builds(Mul, c, c), st.builds(Div, c, c),
    st.builds(Min, c, c), st.builds(Max, c, c), st.builds(TNorm, c, c), st.builds(Resid, c, c),
    st.builds(DeltaFn, c)), max_leaves=12)


@settings(max_examples=300)
@given(terms)
def test_show_parse_round_trip(t):
    assert parse_term(show_term(t)) == t


@settings(max_examples=200)
@given(terms, terms, terms)
def test_substitution_removes_target(a, b, repl):
    g = Cmp("<=", a, b)
    for target in set(subterms(a)) | set(subterms(b)):
        if isinstance(target, (TNorm, Resid, DeltaFn)) and target not in set(subterms(repl)):
            assert target not in interpreted_subterms([substitute(g, repl, target)])


def test_show_examples():
    [g] = parse_constraints("a0L <= max{a1L, mu_p + mu_r - b1L}")
    assert show(g) == "a0L <= max{a1L, mu_p + mu_r - b1L}"
    assert show_term(Resid(ONE, TNorm(mu_p, mu_r))) == "1 => mu_p * mu_r"
    assert show_term(TNorm(Resid(mu_p, mu_q), mu_r)) == "(mu_p => mu_q) * mu_r"
    assert show_term(Sub(Param("b0L"), Sub(ONE, mu_p))) == "b0L - (1 - mu_p)"
