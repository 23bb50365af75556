import io
import json

import pytest

from tx10.cli import main


def run_cli(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue().splitlines()


@pytest.fixture
def prog(tmp_path):
    def write(text, name="p.tx10"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_run_skip_prints_final_digest(prog):
    code, lines = run_cli(["run", prog("skip;")])
    assert code == 0
    assert lines[-1] == "kind=final | status=done | steps=2 | label=ok | exc=- | heap=0:[] 1:[] 2:[]"


def test_run_json_records_have_fixed_key_order(prog):
    code, lines = run_cli(["--json", "run", prog("skip;")])
    assert code == 0
    recs = [json.loads(line) for line in lines]
    assert [r["kind"] for r in recs] == ["step", "step", "final"]
    assert list(recs[0]) == ["kind", "step", "place", "rule", "label", "exc", "stmt", "heap"]
    assert list(recs[-1]) == ["kind", "status", "steps", "label", "exc", "heap"]


def test_run_uncaught_exception_is_reported_not_an_error(prog):
    code, lines = run_cli(["run", prog("throw E;")])
    assert code == 0
    assert "label=sync | exc=E" in lines[-1]


def test_run_with_scheduled_failure(prog):
    code, lines = run_cli(["run", prog("finish { async { at (1) { skip; } } } skip;"),
                           "--semantics", "resilient", "--fail-schedule", "1:1"])
    assert code == 0
    assert "rule=Place Failure" in lines[1]
    assert "heap=0:[] 2:[]" in lines[-1]


def test_explore_reports_stats(prog):
    code, lines = run_cli(["explore", prog("async { skip; } skip;")])
    assert code == 0
    assert lines[0].startswith("kind=lts | semantics=tx10 | nodes=")
    assert lines[1] == "kind=outcome | heap=0:[] 1:[] 2:[]"


@pytest.mark.parametrize("semantics", ["tx10", "resilient"])
def test_check_all_passes_on_small_program(prog, semantics):
    code, lines = run_cli(["check", prog("finish { async { at (1) { skip; } } } skip;"),
                           "--props", "all", "--semantics", semantics])
    assert code == 0
    assert all("result=pass" in line for line in lines[1:])


def test_check_emp_exits_zero(prog):
    code, lines = run_cli(["check", prog("at (1) { throw E; }"), "--props", "emp",
                           "--semantics", "resilient", "--max-failures", "2"])
    assert code == 0
    assert lines[1].startswith("check=emp | result=pass")


def test_check_json(prog):
    code, lines = run_cli(["--json", "check", prog("skip;"), "--props", "no-stuck"])
    assert code == 0
    rec = json.loads(lines[0])
    assert rec["kind"] == "check" and rec["name"] == "no-stuck" and rec["ok"] is True


def test_hb_compare(prog):
    code, lines = run_cli(["hb", prog("finish { async { at (1) { skip; } } } skip;"),
                           "--compare"])
    assert code == 0
    assert lines == ["hbi equal=True only_tx10=[] only_resilient=[]"]


def test_hb_lists_pairs(prog):
    code, lines = run_cli(["hb", prog("async { skip; } skip;")])
    assert code == 0
    assert lines[0].startswith("# semantics=tx10 labels=")
    assert all(line.startswith("hb ") for line in lines[1:])


def test_bisim_law_pair_is_bisimilar(prog):
    a = prog("finish { finish { skip; } }", "a.tx10")
    b = prog("finish { skip; }", "b.tx10")
    code, lines = run_cli(["bisim", a, b])
    assert code == 0
    assert lines[-1] == "BisimilarUpTo(8)"


def test_bisim_distinguished_exits_one_with_witness(prog):
    a = prog("skip;", "a.tx10")
    b = prog("at (1) { throw E; }", "b.tx10")
    code, lines = run_cli(["bisim", a, b])
    assert code == 1
    assert lines[1] == "Distinguished(1)"
    assert lines[-1] == "replayed=True"


def test_laws_single_law(prog):
    code, lines = run_cli(["laws", "--law", "3"])
    assert code == 0
    assert lines[0].startswith("# law suite calculus=tx10 depth=8")
    assert "law=(3)" in lines[1] and "status=ok" in lines[1]


@pytest.mark.parametrize("argv", [
    ["run", "/nonexistent/p.tx10"],
    ["check", "PROG", "--props", "bogus"],
    ["run", "PROG", "--semantics", "resilient", "--fail-places", "0"],
    ["run", "PROG", "--fail-schedule", "x"],
    ["run", "PROG", "--places", "0"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(prog, argv, capsys):
    path = prog("skip;")
    argv = [path if a == "PROG" else a for a in argv]
    code, _ = run_cli(argv)
    assert code == 2


def test_parse_error_exits_two(prog, capsys):
    code, _ = run_cli(["run", prog("skip")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_program_outside_configured_places(prog):
    code, _ = run_cli(["run", prog("at (2) { skip; }"), "--places", "2"])
    assert code == 2
