import csv
import json
import subprocess
import sys

import pytest

from dfdrift.cli import main
from dfdrift.events import EventLog, write_log


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    assert run("generate", "--suite", "desk", "--pattern", "serial_insert", "--segments", "4",
               "--traces-per-segment", "150", "--seed", "3", "--out-dir", out) == 0
    return out


def test_generate_outputs(generated):
    truth = json.loads((generated / "ground_truth.json").read_text())
    assert truth["drift_trace_indexes"] == [150, 300, 450]
    assert truth["pattern"] == "serial_insert" and truth["seed"] == 3
    assert (generated / "log.csv").exists() and (generated / "model.json").exists()
    manifest = json.loads((generated / "manifest.json").read_text())
    assert manifest["subcommand"] == "generate" and manifest["seed"] == 3


def test_generate_is_reproducible(generated, tmp_path):
    assert run("generate", "--suite", "desk", "--pattern", "serial_insert", "--segments", "4",
               "--traces-per-segment", "150", "--seed", "3", "--out-dir", tmp_path) == 0
    assert (tmp_path / "log.csv").read_bytes() == (generated / "log.csv").read_bytes()


def test_detect(generated, tmp_path, capsys):
    assert run("detect", "--input", generated / "log.csv", "--window", 150, "--out-dir", tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["config"]["window_size"] == 150
    assert report["config"]["consecutive_tests"] == 75
    assert len(report["points"]) == 3
    for p in report["points"]:
        assert set(p) >= {"event_index", "trace_index", "timestamp", "direction", "trigger_relation", "p_values"}
    rows = list(csv.DictReader((tmp_path / "report.csv").open()))
    assert [int(r["trace_index"]) for r in rows] == [p["trace_index"] for p in report["points"]]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["ms_per_event"] > 0
    assert "ms/event" in capsys.readouterr().out


def test_detect_report_is_deterministic(generated, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("detect", "--input", generated / "log.csv", "--window", 150, "--out-dir", d) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()


def test_detect_drift_free(tmp_path):
    log_path = tmp_path / "flat.xes"
    write_log(EventLog.from_sequences([list("ABCDE")] * 300), str(log_path))
    assert run("detect", "--input", log_path, "--window", 100, "--out-dir", tmp_path) == 0
    assert json.loads((tmp_path / "report.json").read_text())["points"] == []


@pytest.mark.parametrize("argv", [
    ["detect", "--input", "x.csv", "--window", "0"],
    ["detect", "--input", "x.csv"],
    ["detect", "--input", "x.csv", "--window", "10", "--consecutive-tests", "20"],
    ["generate", "--out-dir", "o"],
    ["generate", "--pattern", "nope", "--out-dir", "o"],
    ["noise", "--input", "x.csv", "--add", "1.5", "--out-dir", "o"],
    ["evaluate", "--window", "10"],
    ["frobnicate"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1


def test_input_errors(tmp_path):
    assert run("detect", "--input", tmp_path / "missing.csv", "--window", 10, "--out-dir", tmp_path) == 2
    bad = tmp_path / "bad.xes"
    bad.write_text("<log><trace>")
    assert run("detect", "--input", bad, "--window", 10, "--out-dir", tmp_path) == 2
    short = tmp_path / "short.csv"
    short.write_text("case_id,activity\nt1,A\nt1,B\n")
    assert run("detect", "--input", short, "--window", 10, "--out-dir", tmp_path) == 2


def test_noise_then_evaluate(generated, tmp_path):
    noisy = tmp_path / "noisy"
    assert run("noise", "--input", generated / "log.csv", "--add", 0.1, "--remove", 0.1,
               "--ground-truth", generated / "ground_truth.json", "--seed", 1, "--out-dir", noisy) == 0
    truth = json.loads((noisy / "ground_truth.json").read_text())
    assert truth["drift_trace_indexes"] == [150, 300, 450]
    assert truth["noise"]["add"] == 0.1

    res_a, res_b = tmp_path / "ra", tmp_path / "rb"
    for d in (res_a, res_b):
        assert run("evaluate", generated, noisy, "--window", 150, "--et", 10, "--et", 50, "--out-dir", d) == 0
    text = (res_a / "results.csv").read_text()
    assert text == (res_b / "results.csv").read_text()
    rows = list(csv.DictReader(text.splitlines()))
    assert [c for c in rows[0] if c.startswith("f_")] == ["f_et10", "f_et50"]
    assert [r["pattern"] for r in rows] == ["serial_insert", "serial_insert", "serial_insert", "ALL"]
    assert rows[0]["noise"] == "0" and rows[1]["noise"] == "0.1/0.1"
    assert float(rows[0]["f_et10"]) == 1.0


def test_evaluate_single_et(generated, tmp_path):
    assert run("evaluate", generated, "--window", 150, "--et", 5, "--out-dir", tmp_path) == 0
    header = (tmp_path / "results.csv").read_text().splitlines()[0]
    assert header.endswith("precision_et5,recall_et5,f_et5")


def test_evaluate_missing_truth(tmp_path):
    assert run("evaluate", tmp_path, "--window", 10, "--out-dir", tmp_path) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dfdrift.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("detect", "generate", "noise", "evaluate"):
        assert sub in proc.stdout
