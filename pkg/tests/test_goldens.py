"""Byte-for-byte regression of CLI output.

Set TX10_REGEN_GOLDENS=1 to rewrite the files after an intended change.
"""
import io
import os
from pathlib import Path

import pytest

from tx10.cli import main

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "demos" / "programs"
GOLDENS = Path(__file__).resolve().parent / "goldens"


def _p(name):
    return str(PROGRAMS / f"{name}.tx10")


CASES = {
    "run_nested_finish": ["run", _p("nested_finish")],
    "run_copy_graph": ["run", _p("copy_graph")],
    "run_interleave_seed7": ["run", _p("interleave"), "--policy", "random", "--seed", "7"],
    "run_nested_finish_failure": ["run", _p("nested_finish"), "--semantics", "resilient",
                                  "--fail-schedule", "2:1"],
    "run_remote_throw_json": ["--json", "run", _p("remote_throw"), "--policy", "random",
                              "--seed", "1"],
    "explore_interleave": ["explore", _p("interleave")],
    "check_nested_finish_resilient": ["check", _p("nested_finish"), "--props", "all",
                                      "--semantics", "resilient", "--max-failures", "2"],
    "hb_nested_finish": ["hb", _p("nested_finish")],
    "hbi_nested_finish": ["hb", _p("nested_finish"), "--compare", "--max-failures", "2"],
    "bisim_law3": ["bisim", _p("law3_left"), _p("law3_right")],
    "bisim_remote_throw": ["bisim", _p("remote_throw"), _p("law3_right"),
                           "--semantics", "resilient"],
    "laws_sample": ["laws", "--law", "3", "--law", "7", "--law", "16"],
}


def render(argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return f"exit={code}\n" + out.getvalue()


def golden_mismatches():
    """Names whose current output differs from the stored file."""
    bad = []
    for name, argv in CASES.items():
        path = GOLDENS / f"{name}.txt"
        if not path.exists() or path.read_text() != render(argv):
            bad.append(name)
    return bad


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    path = GOLDENS / f"{name}.txt"
    text = render(CASES[name])
    if os.environ.get("TX10_REGEN_GOLDENS"):
        path.write_text(text)
    assert path.read_text() == text


@pytest.mark.parametrize("name", ["run_interleave_seed7", "explore_interleave", "laws_sample"])
def test_repeated_runs_identical(name):
    assert render(CASES[name]) == render(CASES[name])
