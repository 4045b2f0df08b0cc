import csv
import json

import pytest

from pmfeedback import cli
from pmfeedback.codec import PrecisionError


def test_simulate_is_byte_deterministic(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["simulate", "--n", "16", "--pe", "0.1", "--trials", "3",
                         "--seed", "7", "--ci", "--out", str(tmp_path / name)]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "trial_00002.transcript.jsonl" in names and "summary.csv" in names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_simulate_outputs(tmp_path):
    assert cli.main(["simulate", "--n", "8", "--pe", "0.2", "--trials", "2", "--seed", "1",
                     "--out", str(tmp_path)]) == 0
    rec = json.loads((tmp_path / "trial_00001.result.json").read_text())
    assert rec["schema"] == 1 and rec["trial"] == 1
    assert rec["config"]["pe"] == "0.2"
    assert rec["result"]["n"] == 8
    rows = list(csv.DictReader((tmp_path / "summary.csv").open()))
    assert [r["name"] for r in rows] == ["error_rate", "rate", "invertibility"]
    assert rows[2]["pass"] == "true"


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("PMFEEDBACK_OUTPUT_DIR", str(tmp_path / "env"))
    assert cli.main(["simulate", "--n", "4", "--pe", "0.1", "--seed", "2"]) == 0
    assert (tmp_path / "env" / "summary.json").exists()


def test_gaussian_channel_file(tmp_path):
    ch = tmp_path / "awgn.json"
    ch.write_text(json.dumps({"kind": "AWGN", "power": "1", "noise_power": "1"}))
    assert cli.main(["simulate", "--channel", str(ch), "--n", "2", "--pe", "0.1",
                     "--seed", "3", "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("argv", [
    ["simulate", "--n", "4", "--pe", "1.5", "--seed", "1"],
    ["simulate", "--n", "4", "--pe", "0.1", "--ci"],
    ["simulate", "--n", "64", "--pe", "0.1", "--seed", "1", "--precision", "16"],
    ["verify", "--suite", "nonsense", "--seed", "1"],
    ["info", "--channel", "/nonexistent/channel.json"],
])
def test_configuration_errors_exit_2(argv, tmp_path):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 2


def test_bad_channel_file_exits_2(tmp_path):
    ch = tmp_path / "bad.json"
    ch.write_text(json.dumps({"kind": "DMC", "input_pmf": ["0.5", "0.5"],
                              "matrix": [["0.5", "0.6"], ["0.5", "0.5"]]}))
    assert cli.main(["info", "--channel", str(ch)]) == 2


def test_argument_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--n", "0", "--pe", "0.1"])
    assert exc.value.code == 2


def test_precision_exhaustion_exits_3(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise PrecisionError("endpoints indistinguishable")
    monkeypatch.setattr(cli, "run_trial", boom)
    assert cli.main(["simulate", "--n", "4", "--pe", "0.1", "--seed", "1",
                     "--out", str(tmp_path)]) == 3


def test_verify_lemma6_small(tmp_path, capsys):
    code = cli.main(["verify", "--suite", "lemma6", "--trials", "2000", "--n", "16",
                     "--seed", "5", "--out", str(tmp_path)])
    report = json.loads((tmp_path / "verify_lemma6.json").read_text())
    assert code == (0 if report["pass"] else 1)
    assert {t["test"] for t in report["tests"]} == {"error_rate", "round_trip"}
    assert "suite lemma6" in capsys.readouterr().out


def test_verify_failure_exits_1(tmp_path):
    # the precision suite passes; the rate suite fails its R_512 thresholds
    # (see the acceptance suite for the measured values)
    assert cli.main(["verify", "--suite", "precision", "--trials", "3", "--n", "32",
                     "--seed", "1", "--out", str(tmp_path)]) == 0
    assert cli.main(["verify", "--suite", "rate", "--trials", "100", "--seed", "1",
                     "--workers", "1", "--out", str(tmp_path)]) == 1


def test_hlcheck_and_lcurve(tmp_path):
    assert cli.main(["hlcheck", "--function", "square", "--samples", "2000", "--seed", "1",
                     "--out", str(tmp_path)]) == 0
    assert (tmp_path / "hlcheck.csv").exists()
    assert cli.main(["lcurve", "--depth", "4", "--samples", "2000", "--seed", "1",
                     "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "lcurve.csv").open()))
    assert len([r for r in rows if r["name"] == "lcurve"]) == 4


def test_info(capsys):
    assert cli.main(["info"]) == 0
    out = capsys.readouterr().out
    assert "0.500084041835" in out and "strict monotonicity: ok" in out
