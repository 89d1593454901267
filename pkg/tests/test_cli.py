"""Command-line behaviour: exit codes, reports, dumps and JSON stability."""
import io
import json
from pathlib import Path

import pytest

from resusage.cli import (
    EXIT_ERROR, EXIT_SAFE, EXIT_UNSAFE, WELL_ANNOTATED_WARNING, RunConfig, analyze, main,
    render_text, run,
)

from conftest import EXAMPLES, example_text, run_example

GOLDEN = Path(__file__).parent / "golden"
CORPUS = sorted(p.stem for p in GOLDEN.glob("*.json"))


def _write(tmp_path, text, name="prog.pi"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def test_cobegin_exit_zero(capsys):
    assert main([str(EXAMPLES / "cobegin.pi")]) == EXIT_SAFE
    assert capsys.readouterr().out.splitlines()[-1] == "No error found"


def test_mutant_exit_one(capsys):
    assert main([str(EXAMPLES / "cobegin_mutant.pi")]) == EXIT_UNSAFE
    out = capsys.readouterr().out
    assert "x: PossiblyUnsafe" in out and "confirmed on the exact net" in out
    assert out.splitlines()[-1].startswith("Possible errors found: 1 of 1")


def test_access_on_channel_is_a_type_error(tmp_path, capsys):
    path = _write(tmp_path, "new c in c!() | acc(c,R).0")
    assert main([path]) == EXIT_ERROR
    assert "type error" in capsys.readouterr().err


def test_parse_error(tmp_path, capsys):
    assert main([_write(tmp_path, "x!(")]) == EXIT_ERROR
    assert "parse error: 1:" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main([str(tmp_path / "nope.pi")]) == EXIT_ERROR
    assert "cannot read" in capsys.readouterr().err


def test_nil_program_has_no_obligations(tmp_path, capsys):
    assert main([_write(tmp_path, "0"), "--json"]) == EXIT_SAFE
    assert json.loads(capsys.readouterr().out)["verdicts"] == []


def test_cap_must_be_positive(tmp_path):
    with pytest.raises(SystemExit) as info:
        main([_write(tmp_path, "0"), "--cap", "0"])
    assert info.value.code == 2
    with pytest.raises(ValueError):
        RunConfig(cap=0)


def test_assume_all_succeed_warns(tmp_path, capsys):
    path = _write(tmp_path, "newR pref(I C v),x in new c in (acc(x,I).c!().0 | c?().acc(x,C).0)")
    code = main([path, "--mode", "liveness", "--assume-all-succeed"])
    captured = capsys.readouterr()
    assert WELL_ANNOTATED_WARNING in captured.err
    assert "well-annotatedness not verified" in captured.err
    assert code == EXIT_SAFE


def test_mode_override(tmp_path, capsys):
    # without guarantees the close may never happen
    path = _write(tmp_path, "newR pref(I C v),x in new c in (acc(x,I).c!().0 | c?().acc(x,C).0)")
    assert main([path]) == EXIT_SAFE
    assert main([path, "--mode", "liveness"]) == EXIT_UNSAFE


@pytest.mark.parametrize("name", CORPUS)
def test_json_matches_golden(name):
    got = run_example(name).to_json(timing=False)
    assert got == json.loads((GOLDEN / f"{name}.json").read_text())


def test_json_schema_keys(capsys):
    main([str(EXAMPLES / "repeatread_noclose.pi"), "--json"])
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {"file", "mode", "verdicts"}
    [v] = report["verdicts"]
    assert set(v) == {"resource", "verdict", "spec", "mode", "witness", "reason", "confirmed",
                      "approximations", "stats"}
    assert set(v["stats"]) == {"places", "transitions", "abstract_states", "millis"}


@pytest.mark.parametrize("seed", [0, 57, 1000])
def test_text_report_is_stable(seed):
    cfg = RunConfig(dumps={"types", "basis", "petri", "dfa"}, seed=seed)
    first = render_text(analyze(example_text("samplerun"), cfg, "s.pi"), cfg)
    second = render_text(analyze(example_text("samplerun"), cfg, "s.pi"), cfg)
    assert first == second
    base = RunConfig(dumps={"types", "basis", "petri", "dfa"})
    assert first == render_text(analyze(example_text("samplerun"), base, "s.pi"), base)


def test_dumps(capsys):
    main([str(EXAMPLES / "samplerun.pi"), "--dump-types", "--dump-basis", "--dump-petri",
          "--dump-dfa"])
    out = capsys.readouterr().out
    for header in ["(*** Program ***)", "(*** Type environment ***)", "(*** Constraints ***)",
                   "(*** Basis for x ***)", "Automaton States ***)", "(*** initial marking ***)",
                   "(*** 14 Places ***)", "(*** 9 Transitions ***)"]:
        assert header in out, header
    assert "etrace(x, " in out and "digraph" in out


def test_dot_dir(tmp_path, capsys):
    main([str(EXAMPLES / "cobegin.pi"), "--dump-petri", "--dot-dir", str(tmp_path)])
    assert (tmp_path / "x.dot").read_text().startswith("digraph")
    assert "digraph" not in capsys.readouterr().out


def test_oracle_cross_report(capsys):
    main([str(EXAMPLES / "cobegin_mutant.pi"), "--oracle", "12", "--json"])
    oracle = json.loads(capsys.readouterr().out)["oracle"]
    assert oracle["depth"] == 12 and not oracle["truncated"]
    assert oracle["violations"]


def test_run_with_explicit_streams():
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig(), str(EXAMPLES / "prodcons.pi"), out, err)
    assert code == EXIT_SAFE and out.getvalue().endswith("No error found\n")
    assert err.getvalue() == ""


def test_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("newR pref(I),x in acc(x,I).acc(x,I).0"))
    assert main(["-"]) == EXIT_UNSAFE
