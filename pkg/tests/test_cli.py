"""CLI behavior: golden output, config handling, exit codes."""

import json

import pytest

from gsforge import cli
from gsforge.graphs import from_edges
from gsforge.oracle import OracleResult
from gsforge.simulator import VerificationReport

TREE61 = ["--protocol", "tree", "--b0", "6", "--b1", "1",
          "--preset", "ff-tableIV"]


def run(capsys, *args):
    code = cli.dispatch(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_estimate_text_golden(capsys):
    code, out, err = run(capsys, "estimate", *TREE61)
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == "0.823"
    assert lines[1].split() == ["source", "base", "exponent"]
    assert any(line.startswith("idle") for line in lines)


def test_estimate_json_and_csv(capsys):
    code, out, _ = run(capsys, "estimate", *TREE61, "--format", "json")
    assert code == 0
    assert json.loads(out)["total"] == pytest.approx(0.822994, abs=1e-6)
    code, out, _ = run(capsys, "estimate", *TREE61, "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "source,base,exponent"
    assert lines[-1].startswith("total,0.822993682")


def test_budget_text_golden(capsys):
    code, out, _ = run(capsys, "budget", "--b0", "6", "--b1", "1",
                       "--preset", "tf-tableIV")
    assert code == 0
    rows = [line.split() for line in out.splitlines()]
    assert [r[0] for r in rows] == ["baseline", "no-SQG-error",
                                    "no-2QG-error", "no-measurement-error",
                                    "no-idle-error"]
    assert [r[1] for r in rows] == ["0.827", "0.839", "0.905", "0.878",
                                    "0.847"]


def test_sweep_fig_golden_head(tmp_path, capsys):
    out_path = tmp_path / "grid.csv"
    code, _, err = run(capsys, "sweep", "--fig", "6a", "--out",
                       str(out_path))
    assert code == 0 and err == ""
    lines = out_path.read_text().splitlines()
    assert lines[0] == "axis1,axis2,metric"
    assert lines[1] == "0.98,1e-07,0.639508586"
    assert len(lines) == 1 + 41 * 41
    assert (tmp_path / "grid.png").exists()


def test_sweep_reruns_are_byte_identical(tmp_path, capsys):
    args = ["sweep", "--protocol", "cluster", "--k", "2", "--n", "4",
            "--preset", "ff-tableIV", "--axis1", "tau:1e-7:9e-7:4",
            "--axis2", "f_sq:0.999:1.0:3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.png").read_bytes() == \
        (tmp_path / "b.png").read_bytes()


def test_sweep_custom_axis_to_stdout(capsys):
    code, out, _ = run(capsys, "sweep", "--protocol", "tree", "--b0", "6",
                       "--b1", "1", "--preset", "ff-tableIV",
                       "--axis1", "tau:1e-7:9e-7:5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "axis1,metric"
    assert lines[2] == "3e-07,0.822993682"


def test_sweep_bad_axis_spec(capsys):
    code, _, err = run(capsys, "sweep", "--protocol", "tree", "--b0", "2",
                       "--b1", "1", "--preset", "ff-tableIV",
                       "--axis1", "tau:1:2")
    assert code == 1 and "axis" in err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"protocol": "tree", "b0": 6, "b1": 1,
                               "preset": "ff-tableIV", "tau": 0.9e-6}))
    code, out, _ = run(capsys, "estimate", "--config", str(cfg))
    assert code == 0 and out.splitlines()[0] == "0.773"
    code, out, _ = run(capsys, "estimate", "--config", str(cfg),
                       "--tau", "3e-7")
    assert code == 0 and out.splitlines()[0] == "0.823"


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, err = run(capsys, "estimate", "--config", str(cfg))
    assert code == 1 and "unknown config key 'nonsense'" in err
    cfg.write_text(json.dumps({"tau": "abc"}))
    code, _, err = run(capsys, "estimate", "--config", str(cfg))
    assert code == 1 and "cannot read 'abc' as float" in err
    cfg.write_text("not json")
    code, _, err = run(capsys, "estimate", "--config", str(cfg))
    assert code == 1 and "not valid JSON" in err
    code, _, err = run(capsys, "estimate", "--config",
                       str(tmp_path / "missing.json"))
    assert code == 1 and "not found" in err


def test_missing_size_flags(capsys):
    code, _, err = run(capsys, "estimate", "--protocol", "tree",
                       "--preset", "ff-tableIV")
    assert code == 1 and "missing --b0, --b1" in err


def test_preset_flavor_contradiction(capsys):
    code, _, err = run(capsys, "estimate", "--protocol", "tree", "--b0",
                       "2", "--b1", "1", "--preset", "ff-tableIV",
                       "--flavor", "tf")
    assert code == 1 and "contradicts preset" in err


def test_bad_fidelity_value(capsys):
    code, _, err = run(capsys, "estimate", "--protocol", "tree", "--b0",
                       "2", "--b1", "1", "--flavor", "ff", "--fsq", "1.5",
                       "--fcnot", "0.99", "--fcr", "0.99")
    assert code == 1 and "f_sq" in err


def test_estimate_rejects_shor(capsys):
    code, _, err = run(capsys, "estimate", "--protocol", "shor",
                       "--preset", "ff-tableIII")
    assert code == 1 and "no closed-form estimate" in err


def test_compile_text_and_format_limits(capsys):
    code, out, _ = run(capsys, "compile", "--protocol", "cluster", "--k",
                       "1", "--n", "1", "--flavor", "ff")
    assert code == 0
    assert out.splitlines()[1] == "H q0"
    assert "EMIT q1 -> p2" in out
    code, _, err = run(capsys, "compile", "--protocol", "cluster", "--k",
                       "1", "--n", "1", "--flavor", "ff", "--format",
                       "csv")
    assert code == 1 and "text or json" in err


def test_verify_protocols_pass(capsys):
    code, out, _ = run(capsys, "verify", "--protocol", "rgs", "--b0", "2",
                       "--flavor", "tf")
    assert code == 0 and "all match the target" in out
    code, out, _ = run(capsys, "verify", "--protocol", "shor", "--flavor",
                       "ff")
    assert code == 0 and "stabilizer rows present" in out


def test_verify_failure_exits_two(capsys, monkeypatch):
    bad = VerificationReport(from_edges(1, []), "exhaustive", 2, False,
                             {"outcomes": {0: -1}})
    monkeypatch.setattr(cli, "verify", lambda c, g: bad)
    code, out, _ = run(capsys, "verify", "--protocol", "cluster", "--k",
                       "1", "--n", "1", "--flavor", "ff")
    assert code == 2 and "FAILED" in out


def test_oracle_within_band(capsys):
    code, out, _ = run(capsys, "oracle", "--protocol", "cluster", "--k",
                       "1", "--n", "2", "--preset", "tf-tableIII",
                       "--method", "dense")
    assert code == 0
    assert "within 0.015" in out
    assert "delta     -0.002137" in out


def test_oracle_band_violation_exits_two(capsys, monkeypatch):
    fake = OracleResult("dense", None, 0.5, 0.0, 0.9, -0.4)
    monkeypatch.setattr(cli, "noisy_state_fidelity",
                        lambda *a, **k: fake)
    monkeypatch.setattr(cli, "band_check", lambda c, p: (True, 0.005, 8))
    code, out, _ = run(capsys, "oracle", "--protocol", "cluster", "--k",
                       "1", "--n", "2", "--preset", "tf-tableIII")
    assert code == 2 and "OUTSIDE" in out


def test_oracle_band_not_applicable_is_informational(capsys, monkeypatch):
    fake = OracleResult("dense", None, 0.5, 0.0, 0.9, -0.4)
    monkeypatch.setattr(cli, "noisy_state_fidelity",
                        lambda *a, **k: fake)
    monkeypatch.setattr(cli, "band_check",
                        lambda c, p: (False, 0.072, 8))
    code, out, _ = run(capsys, "oracle", "--protocol", "cluster", "--k",
                       "1", "--n", "2", "--preset", "tf-tableIII")
    assert code == 0 and "not applicable" in out


def test_unknown_command_and_help(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "-h")[0] == 0
    code, _, err = run(capsys)
    assert code == 1 and "missing command" in err
