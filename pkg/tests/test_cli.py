import subprocess
import sys

import pytest

from hrtc.cli import main

from conftest import CORPUS

POSITIVE = sorted(CORPUS.glob("*.hr"))
NEGATIVE = sorted((CORPUS / "negative").glob("*.hr"))


def test_check_prints_annotated_program(capsys):
    assert main(["check", str(CORPUS / "ex1.hr")]) == 0
    out = capsys.readouterr().out
    assert "id :: forall a . a -> a =\n  \\\\ a0# . \\ (x :: a0#) . x\n" in out


@pytest.mark.parametrize("path", POSITIVE, ids=lambda p: p.stem)
def test_emit_then_verify_agrees_with_verify_flag(path, tmp_path, capsys):
    out = tmp_path / "out.hr"
    assert main(["check", str(path), "--emit-annotated", str(out), "--verify"]) == 0
    assert main(["verify", str(out)]) == 0
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize("path", NEGATIVE, ids=lambda p: p.stem)
def test_negative_exit_code(path, capsys):
    assert main(["check", str(path)]) == 1
    err = capsys.readouterr().err
    assert "error in test" in err


def test_k1k2_diagnostic(capsys):
    assert main(["check", str(CORPUS / "negative" / "k1k2.hr")]) == 1
    err = capsys.readouterr().err
    assert "deepest failing goal: ([(q0#, 1), (y1#, 2)], k2 : q0# -> y1#)" in err
    assert "reason: ->s: scope" in err


def test_empty_file(tmp_path, capsys):
    src = tmp_path / "empty.hr"
    src.write_text("")
    assert main(["check", str(src)]) == 0
    assert capsys.readouterr().out == ""


def test_parse_error_exit_code(tmp_path, capsys):
    src = tmp_path / "bad.hr"
    src.write_text("f :: Nat ->\n")
    assert main(["check", str(src)]) == 2
    assert "1:" in capsys.readouterr().err


def test_kind_error_exit_code(tmp_path):
    src = tmp_path / "bad.hr"
    src.write_text("f :: Missing\n")
    assert main(["check", str(src)]) == 2


def test_missing_file_exit_code(tmp_path):
    assert main(["check", str(tmp_path / "nope.hr")]) == 2
    assert main(["verify", str(tmp_path / "nope.hr")]) == 2


def test_verify_rejects_bad_annotation(tmp_path, capsys):
    src = tmp_path / "bad.hr"
    src.write_text("id :: forall a . a -> a =\n  \\\\ a0# . \\ (x :: a0#) . y\n")
    assert main(["verify", str(src)]) == 3
    assert "unbound name y" in capsys.readouterr().err


def test_trace_flag_and_environment(capsys, monkeypatch):
    path = str(CORPUS / "ex1.hr")
    assert main(["check", path, "--trace"]) == 0
    flagged = capsys.readouterr().err
    assert "step ->i" in flagged
    monkeypatch.setenv("HRTC_TRACE", "1")
    assert main(["check", path]) == 0
    assert capsys.readouterr().err == flagged


def test_max_branches(capsys):
    assert main(["check", str(CORPUS / "church_list.hr"), "--max-branches", "3"]) == 1
    assert "budget" in capsys.readouterr().err


def test_no_heuristic(capsys):
    assert main(["check", str(CORPUS / "revapp.hr"), "--no-heuristic"]) == 0


def test_prelude(tmp_path, capsys):
    out = tmp_path / "out.hr"
    args = ["check", str(CORPUS / "prelude" / "counter.hr"),
            "--prelude", str(CORPUS / "prelude" / "prelude.hr"),
            "--emit-annotated", str(out), "--verify"]
    assert main(args) == 0
    assert main(["verify", str(out)]) == 0
    assert main(["check", str(CORPUS / "prelude" / "counter.hr")]) == 2


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "hrtc.cli", "check", str(CORPUS / "poly.hr")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "poly ::" in r.stdout
