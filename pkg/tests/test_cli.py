"""Command-line behaviour: exit codes, report schemas and output parity."""

import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from socprac.cli import main, render_text

from conftest import FIXTURES


def fx(name):
    return str(FIXTURES / name)


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def structured(capsys, *argv):
    code, out, _ = invoke(capsys, *argv, "--format", "structured")
    return code, json.loads(out)


def schema(name):
    text = resources.files("socprac").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def leaves(value):
    if isinstance(value, dict):
        for v in value.values():
            yield from leaves(v)
    elif isinstance(value, list):
        for v in value:
            yield from leaves(v)
    else:
        yield value


CASES = [
    ("validate", 0, ["validate", fx("lecture.sp"), fx("lecture.scn")]),
    ("validate", 0, ["validate", fx("lecture.sp"), fx("lecture_standing.scn")]),
    ("check", 0, ["check", fx("lecture.sp"), fx("lecture.scn"), "--bound", "12"]),
    ("check", 1, ["check", fx("lecture_nostop.sp"), fx("lecture.scn"), "--require", "a3"]),
    ("check", 1, ["check", fx("lecture.sp"), fx("lecture.scn"), "--bound", "1"]),
    ("run", 0, ["run", fx("lecture.sp"), fx("lecture.scn"), "--seed", "1", "--ticks", "50"]),
    ("run", 1, ["run", fx("lecture.sp"), fx("lecture_violator.scn"), "--seed", "1"]),
    ("trace", 0, ["trace", fx("lecture.sp"), fx("lecture.scn"), fx("lecture_good.trace")]),
    ("trace", 1, ["trace", fx("lecture.sp"), fx("lecture.scn"), fx("lecture_bad.trace")]),
    ("explain", 0, ["explain", fx("lecture.sp"), fx("lecture.scn"), fx("lecture_qa.trace"),
                    "--at", "3"]),
    ("explain", 1, ["explain", fx("lecture_ambiguous.sp"), fx("lecture.scn"),
                    fx("lecture_qa.trace"), "--at", "3"]),
    ("error", 2, ["validate", fx("lecture_ta.sp")]),
    ("error", 2, ["check", fx("lecture_ta.sp"), fx("lecture.scn")]),
]


@pytest.mark.parametrize("name,code,argv", CASES)
def test_structured_reports_match_schema(capsys, name, code, argv):
    got, report = structured(capsys, *argv)
    assert got == code
    jsonschema.validate(report, schema(name))


@pytest.mark.parametrize("name,code,argv", [c for c in CASES if c[0] != "error"])
def test_text_carries_the_same_information(capsys, name, code, argv):
    _, report = structured(capsys, *argv)
    got, text, _ = invoke(capsys, *argv)
    assert got == code
    assert text == render_text(report) + "\n"
    for value in leaves(report):
        if isinstance(value, str) and value:
            assert value in text


def test_check_verdicts(capsys):
    _, useful = structured(capsys, "check", fx("lecture.sp"), fx("lecture.scn"))
    assert useful["verdict"] == "useful" and useful["condition1"]["length"] <= 6
    _, neg = structured(capsys, "check", fx("lecture.sp"), fx("lecture.scn"),
                        "--without-strategy", "1", "--witness", fx("lecture_qa.trace"))
    assert neg["verdict"] == "not-useful"
    assert len(neg["condition2"]["uncovered"]) == 1
    _, unknown = structured(capsys, "check", fx("lecture.sp"), fx("lecture.scn"), "--bound", "1")
    assert unknown["verdict"] == "unknown-at-bound"
    assert unknown["message"] != neg["message"]


def test_explain_lists_stop_talk_after_question(capsys):
    _, report = structured(capsys, "explain", fx("lecture.sp"), fx("lecture.scn"),
                           fx("lecture_qa.trace"), "--at", "3")
    assert "DO(a1, stop(talk))" in report["expectations"]


def test_explain_before_start_has_no_active_practice(capsys):
    code, report = structured(capsys, "explain", fx("lecture.sp"), fx("lecture_early.scn"),
                              fx("lecture_qa.trace"), "--at", "0")
    assert code == 0
    assert not report["practice_active"]
    assert all("lecture" not in a["active_contexts"] for a in report["agents"])


def test_salience_order_resolves_ambiguity(capsys):
    code, report = structured(capsys, "explain", fx("lecture_ambiguous.sp"), fx("lecture.scn"),
                              fx("lecture_qa.trace"), "--at", "3", "--salience-order", "lecture")
    assert code == 0
    assert {a["salient"] for a in report["agents"]} == {"lecture"}


def test_parse_error_is_positioned(capsys, tmp_path):
    bad = tmp_path / "bad.sp"
    bad.write_text("practice p {\n  roles { r }\n  pattern ;\n}\n")
    code, _, err = invoke(capsys, "validate", str(bad))
    assert code == 2
    assert err.startswith(f"{bad}:3:11: error:")


def test_undeclared_role_diagnostic(capsys):
    code, _, err = invoke(capsys, "validate", fx("lecture_ta.sp"))
    assert code == 2
    assert "lecture_ta.sp:28:7: error: undeclared role 'ta' in norm" in err


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["check", fx("lecture.sp")],
    ["run", fx("lecture.sp"), fx("lecture.scn"), "--ticks", "-1"],
    ["validate", "/nonexistent/file.sp"],
    ["check", fx("lecture.sp"), fx("lecture.scn"), "--without-strategy", "9"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert main(argv) == 2


def test_run_writes_only_named_output(tmp_path, capsys):
    out = tmp_path / "run.trace"
    before = sorted(p.name for p in FIXTURES.iterdir())
    code, report = structured(capsys, "run", fx("lecture.sp"), fx("lecture.scn"), "--seed", "1",
                              "--ticks", "50", "--out", str(out))
    assert code == 0
    assert out.read_text().splitlines() == report["trace"]
    assert sorted(p.name for p in FIXTURES.iterdir()) == before
    assert list(tmp_path.iterdir()) == [out]


def test_commands_are_idempotent(capsys):
    argv = ["check", fx("lecture.sp"), fx("lecture.scn")]
    assert invoke(capsys, *argv) == invoke(capsys, *argv)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "socprac", "validate", fx("lecture.sp")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "valid: yes" in proc.stdout


def test_missing_or_malformed_trace_is_a_usage_error(tmp_path, capsys):
    sp, scn = str(FIXTURES / "lecture.sp"), str(FIXTURES / "lecture.scn")
    assert main(["trace", sp, scn, str(tmp_path / "absent.trace")]) == 2
    bad = tmp_path / "bad.trace"
    bad.write_text("0 {a1} go(\n")
    assert main(["trace", sp, scn, str(bad)]) == 2
    assert f"{bad}:1:11: error:" in capsys.readouterr().err
