import io
import json
import subprocess
import sys

import pytest

from bltableau import cli
from bltableau.formula import parse_formula
from bltableau.kset import parse_kset
from bltableau.model import ExtractedModel, OrdinalSum, verify_model

EXAMPLE = ["--k", "[1/2,3/4] u {1}", "1 -> p & r", "D r -> p \\/ q"]


def run(*argv):
    out = io.StringIO()
    code = cli.run(["solve", *argv], out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


def model_of(record) -> ExtractedModel:
    from fractions import Fraction
    comps = tuple((Fraction(c["lo"]), Fraction(c["hi"]), c["kind"]) for c in record["components"])
    return ExtractedModel(OrdinalSum.of(*comps), {a: Fraction(v) for a, v in record["valuation"].items()})


def test_example(backend):
    code, res = run_json(*EXAMPLE, "--backend", backend.backend)
    assert code == 0 and res["verdict"] == "sat"
    assert set(res["stats"]) == {"nodes", "leaves", "solver_calls", "elapsed_ms"}
    psis = [parse_formula("1 -> p & r"), parse_formula("D r -> p \\/ q")]
    assert verify_model(psis, parse_kset("[1/2,3/4] u {1}"), model_of(res["model"]))


def test_valid_formula_is_unsat_outside_one(backend):
    code, res = run_json("--k", "[0,1)", "p -> p", "--backend", backend.backend)
    if backend.backend == "grid" and res["verdict"] == "unknown":
        pytest.skip("grid fallback cannot refute every leaf")
    assert (code, res["verdict"], res["model"]) == (1, "unsat", None)


def test_full_k_is_immediately_sat():
    code, res = run_json("--k", "[0,1]", "p", "--backend", "grid")
    assert code == 0 and res["stats"]["nodes"] == 1
    assert res["model"] == {"components": [], "valuation": {"p": "0"}, "exact": True}


def test_weak_strong_and_degree():
    assert run_json("--weak", "1/2", "1 -> p & r", "--backend", "grid")[0] == 0
    assert run_json("--strong", "1", "0", "--backend", "grid")[0] == 1
    code, res = run_json("--degree", "weak", "--tol", "1/16", "p /\\ ~p", "--backend", "grid")
    assert code == 0
    lo, hi = (res["degree"][k] for k in ("lo", "hi"))
    from fractions import Fraction
    assert Fraction(lo) <= Fraction(1, 2) <= Fraction(hi)


def test_budget_exhaustion_is_unknown():
    code, res = run_json("--k", "{1/3}", "p & q & r -> p & q", "--backend", "grid", "--max-nodes", "3")
    assert code == 2 and res["verdict"] == "unknown"
    assert any("budget" in d for d in res["diagnostics"])


def test_missing_solver_is_unknown():
    code, res = run_json("--k", "{1/2}", "p", "--backend", "smt", "--smt-cmd", "/nonexistent/z3")
    assert code == 2 and "not found" in res["diagnostics"][0]


def test_formula_file(tmp_path):
    f = tmp_path / "psi.txt"
    f.write_text("# worked example\n1 -> p & r\n\nD r -> p \\/ q   # second\n")
    code, res = run_json("--k", "[1/2,3/4] u {1}", "--file", str(f), "--backend", "grid")
    assert code == 0 and set(res["model"]["valuation"]) == {"p", "q", "r"}


def test_trace_records(tmp_path):
    path = tmp_path / "trace.jsonl"
    code, res = run_json(*EXAMPLE, "--backend", "grid", "--trace", str(path))
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(records) == res["stats"]["nodes"] - 1
    assert records[0]["parent"] == "1" and records[0]["rule"] == "split"
    assert set(records[0]) == {"parent", "child", "rule", "case", "active", "added"}
    rules = {r["rule"] for r in records}
    assert rules <= {"split", "star.L", "star.P", "star.min", "impl.all", "impl.L", "impl.P",
                     "impl.min", "delta.1", "delta.2"}


def test_output_is_deterministic(backend):
    outs = []
    for _ in range(2):
        code, res = run_json(*EXAMPLE, "--backend", backend.backend)
        res["stats"].pop("elapsed_ms")
        outs.append(json.dumps(res))
    assert outs[0] == outs[1]


def test_no_prune_same_verdict():
    a = run_json("--k", "(1/2,1]", "p /\\ ~p", "--backend", "grid")
    b = run_json("--k", "(1/2,1]", "p /\\ ~p", "--backend", "grid", "--no-prune")
    assert a[0] == b[0] == 1
    assert a[1]["stats"]["solver_calls"] <= b[1]["stats"]["solver_calls"]


def test_human_format():
    code, text = run(*EXAMPLE, "--backend", "grid", "--format", "human")
    assert code == 0 and text.startswith("verdict: sat\n")
    assert "t-norm:" in text and "valuation:" in text


@pytest.mark.parametrize("argv, message", [
    (["--k", "[0,1", "p"], "bad interval"),
    (["--k", "[0,1]", "p &"], "unexpected end"),
    (["p"], "one of --k"),
    (["--degree", "weak", "p"], "--tol"),
    (["--weak", "3/2", "p"], "[0,1]"),
    (["--weak", "half", "p"], "rational"),
    (["--k", "[0,1]", "--file", "/nonexistent/file", "p"], "No such file"),
])
def test_usage_errors(argv, message, capsys):
    code, out = run(*argv)
    assert code == 64 and out == ""
    assert message in capsys.readouterr().err


def test_argparse_errors_exit_64(capsys):
    for argv in (["solve", "--k", "[0,1]", "--weak", "1", "p"], ["solve", "--backend", "cvc9", "p"],
                 [], ["prove", "p"]):
        with pytest.raises(SystemExit) as info:
            cli.run(argv, out=io.StringIO())
        assert info.value.code == 64


def test_failed_reverification_is_internal_error(monkeypatch):
    monkeypatch.setattr(cli, "verify_model", lambda *a: False)
    code, _ = run(*EXAMPLE, "--backend", "grid")
    assert code == 70


def test_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bltableau", "solve", "--k", "[0,1)", "1",
                           "--backend", "grid"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["verdict"] == "unsat"
