import pytest

from bltableau.solver import SolverConfig, smt_available

GRID = SolverConfig(backend="grid")
SMT = SolverConfig(backend="smt")
HAVE_SMT = smt_available(SMT)

requires_smt = pytest.mark.skipif(not HAVE_SMT, reason="no SMT solver found (install z3-solver)")


@pytest.fixture(params=["grid", pytest.param("smt", marks=requires_smt)])
def backend(request):
    return GRID if request.param == "grid" else SMT


_CRITERIA: list[str] = []


@pytest.fixture
def report():
    """Print one pass/fail line for an acceptance criterion and fail the test on FAIL."""
    def _report(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line
    return _report


def skip_criterion(number: int, why: str):
    line = f"criterion {number}: SKIP  {why}"
    _CRITERIA.append(line)
    print(line)
    pytest.skip(why)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
