import json

import pyparsing as pp
import pytest

from supbound.cli import main
from supbound.services.synthesizer import SynthesisResult, SynthesisStatus

JSON_TYPES = {"integer": int, "string": str, "object": dict}


@pytest.fixture(autouse=True)
def quiet_activity(mocker, mock_publish_event):
    mocker.patch("supbound.services.activity_logger.publish_event", mock_publish_event)


def test_check(fixtures_dir, capsys):
    assert main(["check", str(fixtures_dir / "qiex.trs")]) == 0

    assert "orthogonal: yes" in capsys.readouterr().out


def test_check_json_envelope(fixtures_dir, capsys):
    assert main(["check", str(fixtures_dir / "gadget-sqrt2.trs"), "--json"]) == 1

    envelope = json.loads(capsys.readouterr().out)
    assert envelope["schema_version"] == 1
    assert envelope["command"] == "check"
    assert envelope["exit_code"] == 1
    assert envelope["result"]["orthogonal"] is False


@pytest.mark.parametrize(
    "args,exit_code",
    [
        (["verify", "qiex.trs", "--assignment", "qiex.si"], 0),
        (["verify", "halflog.trs", "--assignment", "halflog.si", "--kind", "qi", "--relax-nullary", "1"], 1),
        (["verify", "halflog.trs", "--assignment", "halflog.si", "--kind", "dpi", "--relax-nullary", "1"], 0),
        (["verify", "doubling.trs", "--assignment", "doubling.si", "--kind", "pi"], 0),
        (["check", "gadget-sqrt2.trs"], 1),
        (["eval", "qiex.trs", "f(0)", "--max-steps", "50"], 2),
        (["eval", "halflog.trs", "log(0)"], 1),
        (["rc", "qiex.trs", "--max-size", "3", "--budget", "100"], 2),
        (["check-model", "qiex.trs", "qiex-qi.model"], 0),
        (["synth", "qiex.trs", "--linear-exact"], 0),
        (["verify", "doubling.trs", "--assignment", "doubling.si", "--kind", "pi", "--pi-mode", "nat"], 0),
    ],
)
def test_exit_codes(fixtures_dir, monkeypatch, args, exit_code):
    monkeypatch.chdir(fixtures_dir)

    assert main(args) == exit_code


def test_verify_inconclusive(tmp_path, capsys):
    trs = tmp_path / "f.trs"
    trs.write_text("f(x) -> g(x)\ng(x) -> x\n")
    si = tmp_path / "f.si"
    si.write_text("f = X^2 + 1\ng = 2 * X\n")

    assert main(["verify", str(trs), "--assignment", str(si)]) == 2

    assert "QI: inconclusive" in capsys.readouterr().out


def test_verify_approximate(fixtures_dir, capsys):
    args = ["verify", str(fixtures_dir / "gadget-sqrt2.trs"), "--assignment", str(fixtures_dir / "gadget-sqrt2.si")]

    assert main(args + ["--approximate"]) == 0

    assert "not a certificate" in capsys.readouterr().out


def test_eval(fixtures_dir, capsys):
    assert main(["eval", str(fixtures_dir / "doubling.trs"), "d(s(s(0)))"]) == 0

    assert capsys.readouterr().out == "s(s(s(s(0)))), 3 steps\n"


def test_dp(fixtures_dir, capsys):
    assert main(["dp", str(fixtures_dir / "qiex.trs")]) == 0

    assert capsys.readouterr().out.splitlines() == [
        "f#(s(s(x))) -> f#(x)    (rule 1)",
        "f#(0) -> f#(0)    (rule 2)",
    ]


def test_synth_writes_assignment(fixtures_dir, tmp_path, capsys):
    output = tmp_path / "qiex.si"

    assert main(["synth", str(fixtures_dir / "qiex.trs"), "-o", str(output)]) == 0

    assert output.read_text() == "f = X1\ns = X1 + 1\n0 = 0\n"
    assert main(["verify", str(fixtures_dir / "qiex.trs"), "--assignment", str(output)]) == 0


def test_synth_timed_out(mocker, fixtures_dir, capsys):
    mocker.patch(
        "supbound.actions.handlers.synthesize",
        return_value=SynthesisResult(status=SynthesisStatus.TIMED_OUT, candidates_tried=7),
    )

    assert main(["synth", str(fixtures_dir / "halflog.trs"), "--kind", "dpi", "--json"]) == 2

    envelope = json.loads(capsys.readouterr().out)
    assert envelope["result"]["status"] == "timed_out"
    assert envelope["result"]["candidates_tried"] == 7


def test_encode_then_check_model(fixtures_dir, tmp_path, capsys):
    script = tmp_path / "qiex.smt2"
    args = ["encode", str(fixtures_dir / "qiex.trs"), "--kind", "qi", "-k", "1", "-d", "1", "--format", "smt2"]

    assert main(args + ["-o", str(script)]) == 0

    sexprs = pp.ZeroOrMore(pp.nested_expr()).ignore(";" + pp.rest_of_line)
    golden = (fixtures_dir / "qiex-qi.smt2").read_text()
    assert script.read_text().startswith("; supbound qi k=1 d=1\n")
    assert sexprs.parse_string(script.read_text()).as_list() == sexprs.parse_string(golden).as_list()
    assert main(["check-model", str(fixtures_dir / "qiex.trs"), str(fixtures_dir / "qiex-qi.model")]) == 0


def test_bound(fixtures_dir, capsys):
    assert main(["bound", str(fixtures_dir / "doubling.trs"), "--rc", "linear:1", "--at", "d:2"]) == 0

    assert capsys.readouterr().out.endswith("d(2) = 3000\n")


def test_schema(capsys):
    assert main(["schema"]) == 0

    schema = json.loads(capsys.readouterr().out)
    assert schema["title"] == "CommandOutput"


def test_broken_trs_is_an_input_error(tmp_path, capsys):
    trs = tmp_path / "broken.trs"
    trs.write_text("f(x -> x\n")

    assert main(["check", str(trs)]) == 3

    err = capsys.readouterr().err
    assert err.startswith("supbound check: line 1")


def test_broken_trs_json_details(tmp_path, capsys):
    trs = tmp_path / "broken.trs"
    trs.write_text("f(x) -> y\n")

    assert main(["check", str(trs), "--json"]) == 3

    details = json.loads(capsys.readouterr().out)["result"]["error_details"]
    assert details["error_type"] == "RhsVariableNotInLhs"


def test_missing_file(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.trs")]) == 3

    assert "missing.trs" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "qiex.trs", "--assignment", "qiex.si", "--kind", "sup"],
        ["synth", "qiex.trs", "--kind", "pi"],
        ["encode", "qiex.trs", "-k", "9"],
        ["bound", "doubling.trs", "--rc", "exp:2"],
        ["prove", "qiex.trs"],
        ["verify", "qiex.trs"],
        ["synth", "qiex.trs", "--linear"],
        ["encode", "qiex.trs", "--format", "json"],
        ["verify", "qiex.trs", "--assignment", "qiex.si", "--kind", "qi", "--pi-mode", "2b"],
        ["encode", "qiex.trs", "--kind", "dpi", "--pi-mode", "2a"],
    ],
)
def test_usage_errors(fixtures_dir, monkeypatch, args):
    monkeypatch.chdir(fixtures_dir)

    assert main(args) == 3


@pytest.mark.parametrize(
    "args",
    [
        ["check", "qiex.trs"],
        ["dp", "halflog.trs"],
        ["verify", "halflog.trs", "--assignment", "halflog.si", "--kind", "dpi", "--relax-nullary", "1"],
        ["encode", "qiex.trs", "--format", "smt2"],
        ["eval", "doubling.trs", "d(s(0))"],
        ["check", "missing.trs"],
    ],
)
def test_json_envelope_follows_shipped_schema(fixtures_dir, monkeypatch, capsys, args):
    schema = json.loads((fixtures_dir / "command-output.schema.json").read_text())
    monkeypatch.chdir(fixtures_dir)

    exit_code = main(args + ["--json"])

    envelope = json.loads(capsys.readouterr().out)
    assert set(schema["required"]) <= set(envelope)
    assert set(envelope) <= set(schema["properties"])
    for key, value in envelope.items():
        assert isinstance(value, JSON_TYPES[schema["properties"][key]["type"]])
    assert envelope["command"] == args[0]
    assert envelope["exit_code"] == exit_code


def test_schema_command_prints_shipped_schema(fixtures_dir, capsys):
    assert main(["schema"]) == 0

    assert json.loads(capsys.readouterr().out) == json.loads((fixtures_dir / "command-output.schema.json").read_text())
