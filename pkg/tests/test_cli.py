from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from conftest import CORPUS

from hddl21 import cli

DOM = str(CORPUS / "transport" / "domain.hddl")
P01 = str(CORPUS / "transport" / "p01.hddl")
PLAN = str(CORPUS / "transport" / "p01.plan")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def checked(out, schema):
    data = json.loads(out)
    jsonschema.validate(data, cli.load_schema(schema))
    return data


def test_check_ok(capsys):
    code, out, _ = run(capsys, "check", DOM, P01, "--format", "json")
    assert code == 0
    assert checked(out, "diagnostics")["ok"] is True


def test_check_reports_syntax_errors(capsys, tmp_path):
    bad = tmp_path / "bad.hddl"
    bad.write_text("(define (domain d)\n  (:bogus))")
    code, out, _ = run(capsys, "check", str(bad), "--format", "json")
    assert code == 1
    (diag,) = checked(out, "diagnostics")["diagnostics"]
    assert (diag["rule"], diag["line"], diag["column"]) == ("syntax", 2, 3)
    code, _, err = run(capsys, "check", str(bad))
    assert code == 1 and "bad.hddl:2:3: error" in err


def test_ground_stats_and_dump(capsys):
    code, out, _ = run(capsys, "ground", DOM, P01, "--format", "json")
    assert code == 0
    assert "total" in checked(out, "stats")["stats"]
    code, out, _ = run(capsys, "ground", DOM, P01, "--dump-ground")
    assert code == 0
    data = checked(out, "ground")
    code, out2, _ = run(capsys, "ground", DOM, P01, "--dump-ground", "--no-prune")
    assert len(json.loads(out2)["actions"]) >= len(data["actions"])
    code, out, _ = run(capsys, "ground", DOM, P01)
    assert code == 0 and out.startswith("action:")


def test_validate_valid_and_explained(capsys):
    code, out, _ = run(capsys, "validate", DOM, P01, PLAN, "--format", "json")
    assert code == 0
    assert checked(out, "verdict")["valid"] is True
    code, out, _ = run(capsys, "validate", DOM, P01, PLAN, "--explain")
    lines = out.splitlines()
    assert code == 0 and lines[-1] == "valid" and lines[0].startswith("t=0: apply")


def test_validate_invalid(capsys, tmp_path):
    bad = tmp_path / "p.plan"
    bad.write_text((CORPUS / "transport" / "p01.plan").read_text().replace("7: (unload", "2: (unload"))
    code, out, _ = run(capsys, "validate", DOM, P01, str(bad), "--format", "json")
    assert code == 1
    (err,) = checked(out, "verdict")["errors"]
    assert err["kind"] == "PreconditionFailure"
    code, out, _ = run(capsys, "validate", DOM, P01, str(bad))
    assert out.splitlines()[:2] == ["invalid", f"  PreconditionFailure at 2: {err['message']}"]


def test_validate_audit_and_format_errors(capsys, tmp_path):
    bad = tmp_path / "p.plan"
    bad.write_text("0: (x) [1.5]\n")
    code, out, _ = run(capsys, "validate", DOM, P01, str(bad), "--format", "json", "--audit")
    assert code == 1 and checked(out, "verdict")["errors"][0]["kind"] == "NonInteger"


def test_validate_reads_stdin(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO((CORPUS / "transport" / "p01.plan").read_text()))
    code, out, _ = run(capsys, "validate", DOM, P01, "-")
    assert code == 0 and out.strip() == "valid"


def test_solve_text_and_json(capsys):
    code, out, _ = run(capsys, "solve", DOM, P01)
    assert code == 0 and "==>" in out
    code, out, _ = run(capsys, "solve", DOM, P01, "--format", "json")
    data = checked(out, "solve")
    assert data["solved"] and data["makespan"] >= 1


def test_solve_optimize_writes_the_makespan(capsys):
    code, out, _ = run(capsys, "solve", DOM, P01, "--optimize")
    assert code == 0 and out.splitlines()[0] == ";; makespan: 8"


def test_solve_failure(capsys):
    code, out, err = run(capsys, "solve", DOM, P01, "--horizon", "3", "--format", "json")
    assert code == 1
    data = checked(out, "solve")
    assert data == {"solved": False, "reason": "horizon", "makespan": None, "stats": data["stats"], "plan": None}
    assert "horizon" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "/nonexistent/domain.hddl"],
        ["validate", DOM, P01, "/nonexistent.plan"],
        ["bench", "/nonexistent"],
    ],
)
def test_operational_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_model_errors_are_operational_for_validate(capsys, tmp_path):
    bad = tmp_path / "d.hddl"
    bad.write_text((CORPUS / "transport" / "domain.hddl").read_text().replace("(:task deliver", "(:task dlvr", 1))
    code, _, err = run(capsys, "validate", str(bad), P01, PLAN)
    assert code == 2


def test_bad_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["solve", DOM, P01, "--horizon", "0"])
    assert info.value.code == 2
    capsys.readouterr()


def make_corpus(tmp_path):
    root = tmp_path / "corpus"
    shutil.copytree(CORPUS / "transport", root / "transport")
    for extra in ("p02", "p03"):
        (root / "transport" / f"{extra}.hddl").unlink()
    return root


def test_bench(capsys, tmp_path):
    root = make_corpus(tmp_path)
    code, out, _ = run(capsys, "bench", str(root), "--format", "json")
    assert code == 0
    data = checked(out, "bench")
    assert [r["instance"] for r in data["rows"]] == ["transport/p01"]
    code, out, _ = run(capsys, "bench", str(root))
    assert code == 0 and "transport/p01" in out


def test_bench_expected_failures(capsys, tmp_path):
    root = tmp_path / "c" / "tiny"
    root.mkdir(parents=True)
    (root / "domain.hddl").write_text(
        "(define (domain tiny) (:requirements :hierarchy :durative-actions) (:predicates (flag) (idle))"
        " (:task top) (:method m :task (top) :subtasks (and (r (raise))))"
        " (:durative-action raise :duration (= ?duration 1) :effect (at end (flag))))"
    )
    (root / "p01.hddl").write_text("(define (problem p) (:domain tiny) (:htn :subtasks (x (top))) (:init) (:goal (idle)))")
    code, out, _ = run(capsys, "bench", str(tmp_path / "c"), "--format", "json")
    assert code == 1 and checked(out, "bench")["rows"][0]["error"] == "exhausted"
    (root / "p01.expect-fail").write_text("")
    code, out, _ = run(capsys, "bench", str(tmp_path / "c"), "--format", "json")
    assert code == 0 and checked(out, "bench")["rows"][0]["expected_fail"] is True


def test_empty_corpus_is_an_error(capsys, tmp_path):
    code, _, err = run(capsys, "bench", str(tmp_path))
    assert code == 2


def test_shell_pipeline(tmp_path):
    solve = subprocess.run([sys.executable, "-m", "hddl21", "solve", DOM, P01], capture_output=True, text=True, check=True)
    check = subprocess.run(
        [sys.executable, "-m", "hddl21", "validate", DOM, P01, "-"], input=solve.stdout, capture_output=True, text=True
    )
    assert check.returncode == 0 and check.stdout.strip() == "valid"


def test_console_script_is_installed():
    exe = shutil.which("hddl21")
    assert exe is not None
    r = subprocess.run([exe, "check", DOM], capture_output=True, text=True)
    assert r.returncode == 0


def test_clean_check_is_silent(capsys):
    code, out, err = run(capsys, "check", DOM, P01)
    assert code == 0 and err == ""


def test_arity_error_gives_one_diagnostic_line(capsys, tmp_path):
    bad = tmp_path / "d.hddl"
    text = (CORPUS / "transport" / "domain.hddl").read_text()
    assert "(at ?v ?l)" in text
    bad.write_text(text.replace("(at ?v ?l)", "(at ?v)", 1))
    code, _, err = run(capsys, "check", str(bad))
    lines = err.splitlines()
    assert code == 1 and len(lines) == 1 and "arity-mismatch" in lines[0]


def test_depth_starved_solve(capsys):
    code, out, err = run(capsys, "solve", DOM, P01, "--max-depth", "1")
    assert code == 1 and out == "" and "depth" in err


@pytest.mark.parametrize("domain, problem", cli.corpus_instances(CORPUS), ids=lambda p: p.parent.name + "/" + p.name)
def test_solve_pipes_into_validate(capsys, monkeypatch, domain, problem):
    code, plan_text, _ = run(capsys, "solve", str(domain), str(problem))
    assert code == 0
    monkeypatch.setattr(sys, "stdin", io.StringIO(plan_text))
    code, out, _ = run(capsys, "validate", str(domain), str(problem), "-")
    assert code == 0 and out.strip() == "valid"
