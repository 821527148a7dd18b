"""Solving finite sets of L0 comparisons over the reals with symbols in [0,1].

Two backends: an external SMT solver spoken to in SMT-LIB 2 (QF_NRA) over a
subprocess pipe, and a grid search that can only ever answer Sat.  Both run
after interval propagation, which proves Unsat cheaply when it can.
"""
from __future__ import annotations

import logging
import os
import queue
import re
import shlex
import shutil
import subprocess
import threading
from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .bounds import propagate
from .kset import Interval
from .numeric import Approx
from .term import (Add, Cmp, Const, Div, Endpoint, Max, Min, Mul, Param, Sub, Var, formula_terms,
                   holds, inline_endpoints, is_l0, show, subterms, symbols)

log = logging.getLogger(__name__)

SMT_CMD_ENV = "BLTAB_SMT_CMD"
APPROX_RADIUS = Fraction(1, 10**9)


@dataclass(frozen=True)
class ConstraintSet:
    atoms: tuple[Cmp, ...]

    @classmethod
    def of(cls, formulas: Iterable, complement: list[Interval] = ()) -> ConstraintSet:
        atoms = []
        for g in formulas:
            if not is_l0(g):
                raise ValueError(f"not an L0 formula: {show(g)}")
            atoms.append(inline_endpoints(g, list(complement)))
        return cls(tuple(dict.fromkeys(atoms)))

    @property
    def symbols(self) -> list[Var | Param]:
        found = set()
        for g in self.atoms:
            found |= symbols(g)
        return sorted(found, key=_symbol_key)


_PARAM_NAME = re.compile(r"([ab])(\d+)([LP])")


def _symbol_key(s):
    # parameters first, in chain-like order a0 b0 a1 b1 ..., then variables
    if isinstance(s, Param):
        m = _PARAM_NAME.fullmatch(s.name)
        if m:
            return (0, int(m.group(2)), m.group(3), m.group(1), s.name)
        return (1, 0, "", "", s.name)
    return (2, 0, "", "", s.name)


@dataclass(frozen=True)
class Solution:
    sigma: dict
    rho: dict
    exact: bool = True
    precision: Fraction | None = None

    def env(self) -> dict:
        return {**self.sigma, **self.rho}

    def with_sigma(self, sigma: dict) -> Solution:
        return replace(self, sigma={k: Fraction(v) if isinstance(v, int) else v
                                    for k, v in sigma.items()})


@dataclass(frozen=True)
class Sat:
    solution: Solution


@dataclass(frozen=True)
class Unsat:
    reason: str = ""


@dataclass(frozen=True)
class Unknown:
    reason: str


SolverResult = Sat | Unsat | Unknown


@dataclass(frozen=True)
class SolverConfig:
    backend: str = "auto"  # "smt", "grid", or "auto" (smt when a solver is installed)
    smt_cmd: str | None = None
    timeout: float = 10.0
    grid_denominator: int = 4
    grid_limit: int = 200_000
    presolve: bool = True

    def resolved_cmd(self) -> list[str] | None:
        cmd = self.smt_cmd or os.environ.get(SMT_CMD_ENV) or "z3"
        argv = shlex.split(cmd)
        if not argv or shutil.which(argv[0]) is None:
            return None
        if len(argv) == 1 and os.path.basename(argv[0]).startswith("z3"):
            argv += ["-in", "-smt2"]
        return argv

    def resolved_backend(self) -> str:
        if self.backend == "auto":
            return "smt" if self.resolved_cmd() is not None else "grid"
        return self.backend


def smt_available(config: SolverConfig | None = None) -> bool:
    return (config or SolverConfig()).resolved_cmd() is not None


def self_check(e: ConstraintSet, sol: Solution) -> list[str]:
    """Atoms the solution fails; approximate solutions pass atoms they cannot refute."""
    env = sol.env()
    failed = []
    for g in e.atoms:
        try:
            ok = holds(g, env)
        except ArithmeticError as exc:
            failed.append(f"{show(g)} ({exc})")
            continue
        if ok is False or (ok is None and sol.exact):
            failed.append(show(g))
    return failed


# -- SMT-LIB ---------------------------------------------------------------

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _sym(name: str) -> str:
    return name if _SIMPLE_SYMBOL.fullmatch(name) else f"|{name}|"


def _num(q: Fraction) -> str:
    q = Fraction(q)
    mag = abs(q)
    text = f"{mag.numerator}.0" if mag.denominator == 1 else f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return f"(- {text})" if q < 0 else text


class _Encoder:
    def __init__(self):
        self.divs: dict = {}
        self.div_axioms: list[str] = []

    def term(self, t) -> str:
        if isinstance(t, (Var, Param)):
            return _sym(t.name)
        if isinstance(t, Const):
            return _num(t.value)
        if isinstance(t, Endpoint):
            raise ValueError("endpoint constants must be inlined before encoding")
        if isinstance(t, Div):
            if t not in self.divs:
                u, w = self.term(t.l), self.term(t.r)
                q = f"div!{len(self.divs)}"
                self.divs[t] = q
                self.div_axioms.append(f"(assert (=> (not (= {w} 0.0)) (= (* {q} {w}) {u})))")
                self.div_axioms.append(f"(assert (=> (= {w} 0.0) (= {q} 0.0)))")
            return self.divs[t]
        l, r = self.term(t.l), self.term(t.r)
        if isinstance(t, Add):
            return f"(+ {l} {r})"
        if isinstance(t, Sub):
            return f"(- {l} {r})"
        if isinstance(t, Mul):
            return f"(* {l} {r})"
        if isinstance(t, Min):
            return f"(ite (<= {l} {r}) {l} {r})"
        if isinstance(t, Max):
            return f"(ite (>= {l} {r}) {l} {r})"
        raise ValueError(f"not an L0 term: {t!r}")


def encode(e: ConstraintSet) -> str:
    """QF_NRA problem for e, ending with check-sat and a model request."""
    enc = _Encoder()
    body = [f"(assert ({g.op} {enc.term(g.lhs)} {enc.term(g.rhs)}))" for g in e.atoms]
    names = [_sym(s.name) for s in e.symbols]
    lines = ["(set-logic QF_NRA)"]
    for name in names:
        lines.append(f"(declare-fun {name} () Real)")
        lines.append(f"(assert (and (<= 0.0 {name}) (<= {name} 1.0)))")
    lines += [f"(declare-fun {q} () Real)" for q in enc.divs.values()]
    lines += enc.div_axioms
    lines += body
    lines.append("(check-sat)")
    lines.append(f"(get-value ({' '.join(names)}))" if names else "(get-model)")
    return "\n".join(lines) + "\n"


def parse_sexprs(text: str) -> list:
    tokens = re.findall(r'\(|\)|"(?:[^"]|"")*"|\|[^|]*\||[^\s()]+', text)
    stack: list[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok[1:-1] if tok.startswith("|") else tok)
    if len(stack) != 1:
        raise ValueError("unbalanced '(' in solver output")
    return stack[0]


class _Irrational(Exception):
    pass


def _value(sx) -> Fraction:
    if isinstance(sx, str):
        if sx.endswith("?"):
            raise _Irrational(sx)
        return Fraction(sx)
    head = sx[0]
    if head == "-" and len(sx) == 2:
        return -_value(sx[1])
    if head == "/" and len(sx) == 3:
        return _value(sx[1]) / _value(sx[2])
    raise _Irrational(str(sx))


def _decimal(sx) -> Fraction:
    if isinstance(sx, str):
        return Fraction(sx.rstrip("?"))
    if sx[0] == "-" and len(sx) == 2:
        return -_decimal(sx[1])
    if sx[0] == "/" and len(sx) == 3:
        return _decimal(sx[1]) / _decimal(sx[2])
    raise ValueError(f"unexpected value {sx!r}")


_END = "<<bltab-end>>"


class SmtProcess:
    """A long-lived solver process; each query is isolated by (reset)."""

    def __init__(self, argv: list[str], timeout: float):
        self.argv = argv
        self.timeout = timeout
        self.proc: subprocess.Popen | None = None
        self.lines: queue.Queue = queue.Queue()

    def _start(self):
        self.proc = subprocess.Popen(self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                     stderr=subprocess.STDOUT, text=True, bufsize=1)
        self.lines = queue.Queue()
        threading.Thread(target=self._pump, args=(self.proc, self.lines), daemon=True).start()

    @staticmethod
    def _pump(proc, lines):
        for line in proc.stdout:
            lines.put(line)
        lines.put(None)

    def close(self):
        if self.proc is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            self.proc.kill()
            self.proc.wait()
            self.proc = None

    def query(self, script: str) -> list[str]:
        if self.proc is None or self.proc.poll() is not None:
            self._start()
        is_z3 = os.path.basename(self.argv[0]).startswith("z3")
        prefix = "(reset)\n(set-option :produce-models true)\n"
        if is_z3:
            prefix += f"(set-option :timeout {int(self.timeout * 1000)})\n"
        suffix = ""
        if is_z3:
            # irrational values come back as root-obj; ask again in decimal
            get_value = script.strip().splitlines()[-1]
            suffix = ("(set-option :pp.decimal true)\n(set-option :pp.decimal_precision 40)\n"
                      f"{get_value}\n(set-option :pp.decimal false)\n")
        try:
            self.proc.stdin.write(prefix + script + suffix + f'(echo "{_END}")\n')
            self.proc.stdin.flush()
        except OSError as exc:
            self.close()
            raise RuntimeError(f"solver process failed: {exc}") from exc
        out = []
        while True:
            try:
                line = self.lines.get(timeout=self.timeout + 5)
            except queue.Empty:
                self.close()
                raise TimeoutError(f"no answer within {self.timeout}s") from None
            if line is None:
                self.close()
                raise RuntimeError("solver process exited: " + " ".join(out)[-300:])
            if line.strip().strip('"') == _END:
                return out
            out.append(line)


def _smt_result(e: ConstraintSet, lines: list[str]) -> SolverResult:
    sexprs = parse_sexprs("".join(lines))
    answer = next((s for s in sexprs if s in ("sat", "unsat", "unknown")), None)
    if answer == "unsat":
        return Unsat("smt")
    if answer != "sat":
        errors = [s for s in sexprs if isinstance(s, list) and s and s[0] == "error"]
        detail = f": {errors[0][1]}" if errors else ""
        return Unknown(f"solver answered {answer or 'nothing'}{detail}")
    names = [s.name for s in e.symbols]
    tables = [s for s in sexprs if isinstance(s, list) and s and isinstance(s[0], list)]
    if not names:
        return Sat(Solution({}, {}))
    values: dict[str, object] = {}
    exact = True
    first = {row[0]: row[1] for row in tables[0]} if tables else {}
    decimal = {row[0]: row[1] for row in tables[1]} if len(tables) > 1 else {}
    for name in names:
        raw = first.get(name)
        if raw is None:
            return Unknown(f"solver gave no value for {name}")
        try:
            values[name] = _value(raw)
        except _Irrational:
            if name not in decimal:
                return Unknown(f"irrational value for {name} without a decimal expansion")
            values[name] = _decimal(decimal[name])
            exact = False
    return _finish(e, values, exact)


def _finish(e: ConstraintSet, values: dict, exact: bool) -> SolverResult:
    """Package values as a verified Solution, snapping approximations when possible."""
    kinds = {s.name: isinstance(s, Param) for s in e.symbols}

    def build(vals, is_exact, precision=None):
        sigma = {k: v for k, v in vals.items() if not kinds[k]}
        rho = {k: v for k, v in vals.items() if kinds[k]}
        return Solution(sigma, rho, is_exact, precision)

    if exact:
        sol = build(values, True)
        failed = self_check(e, sol)
        if failed:
            log.error("solver model fails its own constraints: %s", failed)
            return Unknown("internal: solver model failed self-check: " + "; ".join(failed[:3]))
        return Sat(sol)
    snapped = {k: min(max(v.limit_denominator(10**6), Fraction(0)), Fraction(1))
               for k, v in values.items()}
    sol = build(snapped, True)
    if not self_check(e, sol):
        return Sat(sol)
    approx = {k: Approx.around(v, APPROX_RADIUS) for k, v in values.items()}
    sol = build(approx, False, APPROX_RADIUS)
    failed = self_check(e, sol)
    if failed:
        return Unknown("approximate model failed self-check: " + "; ".join(failed[:3]))
    return Sat(sol)


# -- grid ------------------------------------------------------------------

def grid_search(e: ConstraintSet, denominator: int = 4, limit: int = 200_000,
                box: dict | None = None) -> SolverResult:
    """Try every assignment from {0, 1/d, ..., 1} plus the constants in e; never answers Unsat.

    Symbols are assigned parameters first (in chain order), and each atom is
    checked as soon as its last symbol has a value.
    """
    if denominator < 1:
        raise ValueError("grid denominator must be at least 1")
    syms = e.symbols
    # constants of the problem (K's endpoints, mostly) join the grid
    grid = sorted({Fraction(i, denominator) for i in range(denominator + 1)}
                  | {s.value for g in e.atoms for t in formula_terms(g) for s in subterms(t)
                     if isinstance(s, Const) and 0 <= s.value <= 1})
    domains = []
    for s in syms:
        lo, hi = box.get(s.name, (0, 1)) if box else (0, 1)
        domains.append([v for v in grid if (lo is None or v >= lo) and (hi is None or v <= hi)])
    depth_of = {s.name: i for i, s in enumerate(syms)}
    checks: list[list[Cmp]] = [[] for _ in range(len(syms) + 1)]
    for g in e.atoms:
        last = max((depth_of[s.name] + 1 for s in symbols(g)), default=0)
        checks[last].append(g)
    env: dict = {}
    visited = 0

    def ok(depth: int) -> bool:
        try:
            return all(holds(g, env) for g in checks[depth])
        except ArithmeticError:
            return False

    def search(depth: int) -> bool:
        nonlocal visited
        if depth == len(syms):
            return True
        name = syms[depth].name
        for v in domains[depth]:
            visited += 1
            if visited > limit:
                raise _GridLimit
            env[name] = v
            if ok(depth + 1) and search(depth + 1):
                return True
        env.pop(name, None)
        return False

    if not ok(0):
        return Unknown("grid: ground constraint false (grid search never reports unsat)")
    try:
        found = search(0)
    except _GridLimit:
        return Unknown(f"grid: search limit of {limit} assignments exceeded")
    if not found:
        return Unknown(f"grid: no solution on the 1/{denominator} grid")
    return _finish(e, dict(env), True)


class _GridLimit(Exception):
    pass


# -- front door ------------------------------------------------------------

class Backend:
    """Answers check() queries; owns at most one solver process."""

    def __init__(self, config: SolverConfig):
        self.config = config
        self.kind = config.resolved_backend()
        self.process: SmtProcess | None = None
        if self.kind == "smt":
            argv = config.resolved_cmd()
            if argv is None:
                self.launch_error = f"SMT solver {config.smt_cmd or 'z3'!r} not found"
            else:
                self.launch_error = None
                self.process = SmtProcess(argv, config.timeout)
        elif self.kind != "grid":
            raise ValueError(f"unknown backend {config.backend!r}")

    def check(self, e: ConstraintSet) -> SolverResult:
        box = None
        if self.config.presolve:
            box = propagate(e.atoms)
            if box is None:
                return Unsat("interval propagation")
        if self.kind == "grid":
            return grid_search(e, self.config.grid_denominator, self.config.grid_limit, box)
        if self.process is None:
            return Unknown(self.launch_error)
        try:
            lines = self.process.query(encode(e))
        except (TimeoutError, RuntimeError, OSError) as exc:
            return Unknown(f"smt: {exc}")
        try:
            return _smt_result(e, lines)
        except ValueError as exc:
            return Unknown(f"smt: unreadable answer ({exc})")

    def close(self):
        if self.process is not None:
            self.process.close()


@contextmanager
def open_backend(config: SolverConfig):
    backend = Backend(config)
    try:
        yield backend
    finally:
        backend.close()


def check_constraints(e: ConstraintSet, config: SolverConfig | None = None) -> SolverResult:
    with open_backend(config or SolverConfig()) as backend:
        return backend.check(e)
