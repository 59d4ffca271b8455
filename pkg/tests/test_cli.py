import json
from pathlib import Path

import pytest

from dcmon.cli import main
from dcmon.corpus import POLICY_DIR, build_policy_source
from dcmon.sim import write_trace
from dcmon.tracegen import make_bench_trace

from conftest import sends_every


@pytest.fixture()
def msg_policy_file(tmp_path) -> Path:
    p = tmp_path / "MsgCntLmt.dcp"
    p.write_text(build_policy_source("MsgCntLmt"), encoding="utf-8")
    return p


@pytest.fixture()
def small_trace_file(tmp_path) -> Path:
    p = tmp_path / "trace.jsonl"
    write_trace(p, sends_every(1000, 501))
    return p


def test_compile_ok(capsys, msg_policy_file):
    assert main(["compile", str(msg_policy_file)]) == 0
    assert "ok" in capsys.readouterr().out


def test_compile_shipped_corpus_files():
    for dcp in sorted(POLICY_DIR.glob("*.dcp")):
        assert main(["compile", str(dcp)]) == 0, dcp


def test_compile_validation_error_exit_1(capsys, tmp_path):
    p = tmp_path / "bad.dcp"
    p.write_text(
        "Events { } Conditions { GlobalSide { c = { global.ghost >= 1 } } } Actions { } Rules { }",
        encoding="utf-8",
    )
    assert main(["compile", str(p)]) == 1
    err = capsys.readouterr().err
    assert "UnresolvedName" in err
    # one LINE:COL: code: message diagnostic per line
    line = err.strip().splitlines()[0]
    pos, code, _ = line.split(": ", 2)
    assert all(part.isdigit() for part in pos.split(":"))
    assert code == "UnresolvedName"


def test_compile_parse_error_exit_1(capsys, tmp_path):
    p = tmp_path / "bad.dcp"
    p.write_text("Events {", encoding="utf-8")
    assert main(["compile", str(p)]) == 1
    assert "ParseError" in capsys.readouterr().err


def test_compile_missing_file_exit_2(capsys):
    assert main(["compile", "/nonexistent/policy.dcp"]) == 2


def test_run_writes_outputs(tmp_path, capsys, msg_policy_file, small_trace_file):
    out = tmp_path / "out"
    code = main(["run", str(msg_policy_file), str(small_trace_file), "--out", str(out)])
    assert code == 0
    verdicts = (out / "verdicts.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(verdicts) == 501
    assert sum(1 for line in verdicts if json.loads(line)["decision"] == "Blocked") == 1
    assert (out / "snapshot.json").exists()
    assert (out / "channel.jsonl").exists()


def test_run_exit_zero_with_blocked_events(tmp_path, msg_policy_file, small_trace_file):
    assert main(["run", str(msg_policy_file), str(small_trace_file), "--out", str(tmp_path / "o")]) == 0


def test_run_empty_trace(tmp_path, capsys, msg_policy_file):
    trace = tmp_path / "empty.jsonl"
    trace.write_text("", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["run", str(msg_policy_file), str(trace), "--out", str(out)]) == 0
    assert (out / "verdicts.jsonl").read_text(encoding="utf-8") == ""


def test_run_unknown_api_exit_3(tmp_path, msg_policy_file):
    trace = tmp_path / "bad.jsonl"
    trace.write_text('{"t_ms": 0, "app": "A", "call": "Camera.takePicture", "args": []}\n', encoding="utf-8")
    assert main(["run", str(msg_policy_file), str(trace), "--out", str(tmp_path / "o")]) == 3


def test_run_malformed_trace_exit_3(tmp_path, msg_policy_file):
    trace = tmp_path / "bad.jsonl"
    trace.write_text("not json\n", encoding="utf-8")
    assert main(["run", str(msg_policy_file), str(trace), "--out", str(tmp_path / "o")]) == 3


def test_run_missing_trace_exit_2(tmp_path, msg_policy_file):
    assert main(["run", str(msg_policy_file), "/nonexistent.jsonl", "--out", str(tmp_path / "o")]) == 2


def test_run_deterministic_outputs(tmp_path, msg_policy_file, small_trace_file):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["run", str(msg_policy_file), str(small_trace_file), "--out", str(out_a)])
    main(["run", str(msg_policy_file), str(small_trace_file), "--out", str(out_b)])
    for name in ("verdicts.jsonl", "snapshot.json", "channel.jsonl"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_bench_and_report(tmp_path, capsys):
    trace = tmp_path / "bench.jsonl"
    write_trace(trace, make_bench_trace(per_kind=8))
    report = tmp_path / "report.json"
    code = main(
        ["bench", "--policies", "WiFiLmt,PhoneExtBlk", "--trace", str(trace), "--reps", "30", "--out", str(report)]
    )
    assert code == 0
    table = capsys.readouterr().out
    assert "Overhead" in table and "WiFiLmt" in table
    doc = json.loads(report.read_text(encoding="utf-8"))
    assert {r["policy"] for r in doc["rows"]} == {"WiFiLmt", "PhoneExtBlk"}
    for row in doc["rows"]:
        recomputed = (row["monitored_ms"] - row["unmonitored_ms"]) / row["unmonitored_ms"] * 100.0
        assert abs(recomputed - row["overhead_pct"]) < 1e-9
    assert main(["report", str(report)]) == 0
    assert "WiFiLmt" in capsys.readouterr().out


def test_bench_unknown_policy(tmp_path):
    trace = tmp_path / "bench.jsonl"
    write_trace(trace, make_bench_trace(per_kind=2))
    assert main(["bench", "--policies", "NoSuch", "--trace", str(trace), "--out", str(tmp_path / "r.json")]) == 2


def test_bench_trace_must_exercise_policy(tmp_path):
    trace = tmp_path / "wifi_only.jsonl"
    write_trace(trace, [])
    trace.write_text('{"t_ms": 0, "app": "A", "call": "WifiManager.setWifiEnabled", "args": [true]}\n', encoding="utf-8")
    assert main(["bench", "--policies", "MsgCntLmt", "--trace", str(trace), "--out", str(tmp_path / "r.json")]) == 3
