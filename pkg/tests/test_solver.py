import random
from fractions import Fraction

import pytest

from bltableau.numeric import is_exact
from bltableau.solver import (ConstraintSet, Sat, Solution, SolverConfig, Unknown, Unsat,
                              check_constraints, encode, grid_search, open_backend,
                              parse_sexprs, self_check)
from bltableau.term import (Add, Cmp, Const, Div, Max, Min, Mul, Sub, Var, holds,
                            parse_constraints)

from conftest import GRID, SMT, requires_smt

# leaf (1242111) of the worked example, endpoints already inlined
GOLDEN_LEAF = """
0 <= a0L < b0L <= 1; a0L = a1L < b1L = b0L; a1L <= mu_p <= b1L; a1L <= mu_r <= b1L;
a0L <= max{a1L, mu_p + mu_r - b1L} < 1 <= b0L;
1/2 <= b0L - 1 + max{a1L, mu_p + mu_r - b1L}; b0L - 1 + max{a1L, mu_p + mu_r - b1L} <= 3/4;
1 <= mu_r; 1 <= max{mu_p, mu_q}; 1/2 <= 1; 1 <= 1
"""
REFERENCE_WITNESS = Solution(
    {"mu_p": Fraction(1, 2), "mu_q": Fraction(1), "mu_r": Fraction(1)},
    {"a0L": Fraction(0), "b0L": Fraction(1), "a1L": Fraction(0), "b1L": Fraction(1)})


def cs(text: str) -> ConstraintSet:
    return ConstraintSet.of(parse_constraints(text))


def test_reference_witness_solves_golden_leaf():
    assert self_check(cs(GOLDEN_LEAF), REFERENCE_WITNESS) == []


def test_golden_leaf_is_sat(backend):
    result = check_constraints(cs(GOLDEN_LEAF), backend)
    assert isinstance(result, Sat)
    assert self_check(cs(GOLDEN_LEAF), result.solution) == []


def test_grid_finds_golden_leaf_on_half_grid():
    result = grid_search(cs(GOLDEN_LEAF), denominator=2)
    assert isinstance(result, Sat)
    assert self_check(cs(GOLDEN_LEAF), result.solution) == []


def test_grid_never_reports_unsat():
    assert isinstance(grid_search(cs("1 <= 3/4"), 4), Unknown)
    assert isinstance(grid_search(cs("x · x = 1/2"), 4), Unknown)
    assert isinstance(grid_search(cs("a < b; b <= a"), 7), Unknown)


def test_grid_limit_gives_unknown():
    result = grid_search(cs("x + y + z + w < 0"), 9, limit=50)
    assert isinstance(result, Unknown) and "limit" in result.reason


def test_trivial_sat(backend):
    result = check_constraints(cs("x <= x"), backend)
    assert isinstance(result, Sat)
    assert set(result.solution.sigma) == {"x"}


def test_presolver_refutes_ground_falsehood():
    # interval propagation is sound, so even the grid front door may answer Unsat here
    assert isinstance(check_constraints(cs("1 <= 3/4"), GRID), Unsat)
    assert isinstance(check_constraints(cs("1 <= 3/4"), SolverConfig(backend="grid", presolve=False)),
                      Unknown)


@requires_smt
@pytest.mark.parametrize("text", ["1 <= 3/4", "a < b; b <= a", "x · y = 1/2; x + y < 1/2"])
def test_smt_unsat(text):
    assert isinstance(check_constraints(cs(text), SolverConfig(backend="smt", presolve=False)), Unsat)


@requires_smt
def test_smt_irrational_witness_is_approximate():
    result = check_constraints(cs("x · x = 1/2"), SMT)
    assert isinstance(result, Sat)
    sol = result.solution
    assert not sol.exact and sol.precision == Fraction(1, 10**9)
    assert not is_exact(sol.sigma["x"])
    assert abs(sol.sigma["x"].mid ** 2 - Fraction(1, 2)) < Fraction(1, 10**8)


@requires_smt
def test_smt_division_by_zero_convention():
    # x / 0 = 0, so "x / y = 1/2 and y = 0" is unsatisfiable while "x / y = 0 and y = 0" is not
    assert isinstance(check_constraints(cs("x / y = 1/2; y = 0"), SMT), Unsat)
    result = check_constraints(cs("x / y = 0; y = 0; x = 1"), SMT)
    assert isinstance(result, Sat) and result.solution.sigma["x"] == 1


def test_evaluation_division_convention():
    assert holds(Cmp("=", Div(Var("x"), Var("y")), Const(Fraction(0))),
                 {"x": Fraction(1), "y": Fraction(0)})


def test_encode_structure():
    text = encode(cs("a0L <= max{a1L, x + y - b1L}; 0 <= a0L"))
    assert text.startswith("(set-logic QF_NRA)\n")
    assert "(ite (>= a1L (- (+ x y) b1L)) a1L (- (+ x y) b1L))" in text
    assert "(assert (<= 0.0 a0L))" in text
    for name in ("a0L", "a1L", "b1L", "x", "y"):
        assert f"(declare-fun {name} () Real)" in text
        assert f"(assert (and (<= 0.0 {name}) (<= {name} 1.0)))" in text
    assert text.rstrip().endswith("(get-value (a0L a1L b1L x y))")
    assert text.index("(check-sat)") < text.index("(get-value")


def test_encode_division_guard():
    text = encode(cs("x / y < 1/2"))
    assert "(assert (=> (not (= y 0.0)) (= (* div!0 y) x)))" in text
    assert "(assert (=> (= y 0.0) (= div!0 0.0)))" in text
    assert "(assert (< div!0 (/ 1.0 2.0)))" in text


def test_encode_is_deterministic():
    a = cs("mu_q <= b0L; a1L < mu_p / a0L; min{mu_p, mu_q} = a1L")
    b = cs("mu_q <= b0L; a1L < mu_p / a0L; min{mu_p, mu_q} = a1L")
    assert encode(a) == encode(b)
    # parameters in chain order, then variables
    assert "get-value (a0L b0L a1L mu_p mu_q)" in encode(a)


def test_endpoints_are_inlined():
    from bltableau.kset import Interval
    from bltableau.term import Endpoint
    e = ConstraintSet.of([Cmp("<", Var("t"), Endpoint("-", 1)), Cmp("<=", Endpoint("+", 2), Var("t"))],
                         [Interval(0, Fraction(1, 2), True, False), Interval(Fraction(3, 4), 1, False, False)])
    assert e.atoms == (Cmp("<", Var("t"), Const(Fraction(0))), Cmp("<=", Const(Fraction(1)), Var("t")))


def test_rejects_non_l0():
    with pytest.raises(ValueError):
        cs("x * y <= 1")


def test_parse_sexprs():
    assert parse_sexprs("sat\n((x (/ 1.0 3.0)) (y (- 2.0)))") == \
        ["sat", [["x", ["/", "1.0", "3.0"]], ["y", ["-", "2.0"]]]]


def test_missing_solver_is_unknown():
    with open_backend(SolverConfig(backend="smt", smt_cmd="/nonexistent/solver")) as b:
        result = b.check(cs("x <= y"))
    assert isinstance(result, Unknown) and "not found" in result.reason


# -- backend agreement ------------------------------------------------------

def _random_term(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.7:
            return Var(rng.choice("xyz"))
        return Const(Fraction(rng.randint(0, 4), 4))
    op = rng.choice((Add, Sub, Mul, Div, Min, Max))
    return op(_random_term(rng, depth - 1), _random_term(rng, depth - 1))


def _random_set(rng):
    return ConstraintSet(tuple(Cmp(rng.choice(("<=", "<", "=")), _random_term(rng, 2), _random_term(rng, 2))
                               for _ in range(rng.randint(1, 4))))


@requires_smt
def test_backend_agreement():
    rng = random.Random(3)
    agreed = 0
    with open_backend(SMT) as smt:
        while agreed < 120:
            e = _random_set(rng)
            if not isinstance(grid_search(e, 4), Sat):
                continue
            result = smt.check(e)
            assert not isinstance(result, Unsat), encode(e)
            if isinstance(result, Sat):
                assert self_check(e, result.solution) == []
            agreed += 1
