"""Acceptance suite: one test per release criterion, one PASS line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete. Criteria with runtime budgets assert them.
"""

import random
import time

from dcmon.bench import run_bench
from dcmon.central_monitor import check_asymmetry
from dcmon.cli import main as cli_main
from dcmon.config import DEFAULT_CONFIG
from dcmon.corpus import CORPUS_IDS, build_policy_source, compile_corpus_policy, oracle_verdicts
from dcmon.dsl import ParseError, PolicySpec, parse_policy, validate_policy
from dcmon.engine import CompiledPolicy
from dcmon.lang.values import MS_PER_HOUR, MS_PER_MINUTE, MS_PER_SECOND, VType
from dcmon.sim import run
from dcmon.tracegen import make_bench_trace, make_trace

from conftest import dial, send, sends_every, wifi

RUN_LOGS = []  # (label, channel entries) accumulated across criteria


def _run(trace, cp, label, **kwargs):
    result = run(trace, cp, DEFAULT_CONFIG, **kwargs)
    RUN_LOGS.append((label, result.channel_entries))
    return result


def _pass(line: str) -> None:
    print(f"PASS {line}")


def test_criterion_01_corpus_compiles(tmp_path):
    start = time.monotonic()
    for pid in CORPUS_IDS:
        source = build_policy_source(pid, DEFAULT_CONFIG)
        result = validate_policy(parse_policy(source))
        assert isinstance(result, CompiledPolicy), f"{pid} failed validation"
        policy_file = tmp_path / f"{pid}.dcp"
        policy_file.write_text(source, encoding="utf-8")
        assert cli_main(["compile", str(policy_file)]) == 0
    elapsed = time.monotonic() - start
    assert elapsed < 1.0, f"corpus compilation took {elapsed:.2f}s"
    _pass(f"criterion 1: all {len(CORPUS_IDS)} policies compile, exit 0 each ({elapsed:.2f}s)")


def test_criterion_02_oracle_equivalence():
    start = time.monotonic()
    traces = [make_trace(700_000 + i) for i in range(200)]
    assert all(len(t) <= 2000 for t in traces)
    checked = 0
    for pid in CORPUS_IDS:
        cp = compile_corpus_policy(pid, DEFAULT_CONFIG)
        for idx, trace in enumerate(traces):
            got = _run(trace, cp, f"equiv-{pid}-{idx}").decisions()
            want = oracle_verdicts(pid, trace, DEFAULT_CONFIG)
            assert got == want, f"{pid} diverges from oracle on trace {idx}"
            checked += len(trace)
    elapsed = time.monotonic() - start
    assert elapsed < 120.0, f"equivalence sweep took {elapsed:.1f}s"
    _pass(
        f"criterion 2: 200 random traces x {len(CORPUS_IDS)} policies match the oracles "
        f"exactly ({checked} event decisions, {elapsed:.1f}s)"
    )


def test_criterion_03_device_centric_aggregation():
    cp = compile_corpus_policy("MsgCntLmt", DEFAULT_CONFIG)
    apps = [f"App{i}" for i in range(5)]
    trace = sends_every(MS_PER_SECOND, 501, apps=apps)
    decisions = _run(trace, cp, "device-centric").decisions()
    assert decisions[:500] == ["Allowed"] * 500
    assert decisions[500] == "Blocked"
    per_app = {app: sum(1 for e in trace if e.app == app) for app in apps}
    assert all(count <= 101 for count in per_app.values())  # ~100 each
    _pass("criterion 3: 501 sends split over 5 apps block exactly the 501st combined send")


def test_criterion_04_named_scenarios():
    # MsgCntLmtHr: 101st send within a sliding hour blocked, then re-allowed
    cp = compile_corpus_policy("MsgCntLmtHr", DEFAULT_CONFIG)
    burst = sends_every(30 * MS_PER_SECOND, 101)
    decisions = _run(burst, cp, "hr-quota").decisions()
    assert decisions[:100] == ["Allowed"] * 100 and decisions[100] == "Blocked"
    slid = burst + [send(burst[0].t + MS_PER_HOUR + 30 * MS_PER_SECOND * 99 + 1)]
    assert _run(slid, cp, "hr-quota-slide").decisions()[-1] == "Allowed"

    # MsgTimeLmt: 59s after the previous allowed send blocked, 61s allowed
    cp = compile_corpus_policy("MsgTimeLmt", DEFAULT_CONFIG)
    assert _run([send(0), send(59 * MS_PER_SECOND)], cp, "gap-59").decisions() == ["Allowed", "Blocked"]
    assert _run([send(0), send(61 * MS_PER_SECOND)], cp, "gap-61").decisions() == ["Allowed", "Allowed"]

    # OneHrPerSittingOnly: blocked at minute 60, released after 15 idle minutes
    cp = compile_corpus_policy("OneHrPerSittingOnly", DEFAULT_CONFIG)
    sitting = sends_every(MS_PER_MINUTE, 121)
    decisions = _run(sitting, cp, "sitting").decisions()
    assert decisions[59] == "Allowed" and decisions[60] == "Blocked"
    rested = sitting + [send(135 * MS_PER_MINUTE)]
    assert _run(rested, cp, "sitting-rest").decisions()[-1] == "Allowed"

    # PhoneExtBlk: foreign prefix blocked, domestic allowed
    cp = compile_corpus_policy("PhoneExtBlk", DEFAULT_CONFIG)
    calls = [dial(0, "+3912345678"), dial(1000, "+35621123456"), dial(2000, "21234567")]
    assert _run(calls, cp, "foreign").decisions() == ["Blocked", "Allowed", "Allowed"]

    # WiFiLmt: enable at 14:00 blocked with zero channel messages
    cp = compile_corpus_policy("WiFiLmt", DEFAULT_CONFIG)
    result = _run([wifi(14 * MS_PER_HOUR, True)], cp, "wifi")
    assert result.decisions() == ["Blocked"]
    assert len(result.channel_entries) == 0
    _pass("criterion 4: named scenario checks exact (hour window, send gap, sitting, foreign call, wifi)")


def test_criterion_05_channel_asymmetry():
    assert RUN_LOGS, "earlier criteria must have recorded channel logs"
    cp = compile_corpus_policy("MsgCntLmtHr", DEFAULT_CONFIG)
    concurrent = run(
        sends_every(0, 150, apps=["A", "B", "C", "D", "E"]), cp, DEFAULT_CONFIG, concurrent_same_t=True
    )
    RUN_LOGS.append(("concurrent", concurrent.channel_entries))
    total = 0
    for label, entries in RUN_LOGS:
        problems = check_asymmetry(entries)
        assert not problems, f"{label}: {problems}"
        total += len(entries)
    _pass(f"criterion 5: channel asymmetry holds over {len(RUN_LOGS)} runs ({total} messages)")


def test_criterion_06_overhead_ordering():
    trace = make_bench_trace(per_kind=120)
    report = run_bench(["WiFiLmt", "MsgCntLmtHr"], trace, DEFAULT_CONFIG, repetitions=30)
    rows = {r.policy_id: r for r in report.rows}
    wifi_row, hr_row = rows["WiFiLmt"], rows["MsgCntLmtHr"]
    assert wifi_row.locality == "LocalOnly" and hr_row.locality == "NeedsGlobal"
    assert wifi_row.overhead_pct is not None and hr_row.overhead_pct is not None
    assert wifi_row.overhead_pct < hr_row.overhead_pct
    _pass(
        "criterion 6: LocalOnly WiFiLmt overhead "
        f"{wifi_row.overhead_pct:.0f}% < NeedsGlobal MsgCntLmtHr {hr_row.overhead_pct:.0f}% "
        "(30 reps, matched traces)"
    )


def test_criterion_07_memory_accounting():
    # 150 sends per hour for three hours
    cp_hr = compile_corpus_policy("MsgCntLmtHr", DEFAULT_CONFIG)
    trace = sends_every(24 * MS_PER_SECOND, 450)
    res_hr = _run(trace, cp_hr, "memory-hr")
    times = res_hr.global_state.vars.get("sendTimes", VType.TS_LIST)
    assert len(times) <= 100

    cp_day = compile_corpus_policy("MsgCntLmt", DEFAULT_CONFIG)
    res_day = _run(trace, cp_day, "memory-day")
    from dcmon.central_monitor import state_size

    report_hr = state_size(res_hr.global_state)
    report_day = state_size(res_day.global_state)
    day_kinds = [row["kind"] for row in report_day["vars"].values()]
    assert day_kinds.count("int") == 1
    assert day_kinds.count("ts_list") == 0
    assert report_hr["total_bytes"] > 0 and report_day["total_bytes"] > 0
    _pass(
        f"criterion 7: MsgCntLmtHr list holds {len(times)} <= 100 timestamps; MsgCntLmt keeps one "
        f"integer counter; byte totals {report_hr['total_bytes']} / {report_day['total_bytes']}"
    )


def test_criterion_08_determinism():
    cp = compile_corpus_policy("MsgCntLmtHr", DEFAULT_CONFIG)
    trace = make_trace(991, max_events=800)
    first = _run(trace, cp, "determinism-a")
    second = _run(trace, cp, "determinism-b")
    assert first.verdict_lines() == second.verdict_lines()
    assert first.snapshot == second.snapshot
    assert first.channel_lines() == second.channel_lines()
    _pass("criterion 8: repeated runs byte-identical (verdicts, snapshot, channel log)")


def test_criterion_09_parser_fuzz():
    start = time.monotonic()
    rng = random.Random(0xFADE)
    corpus_sources = [build_policy_source(pid, DEFAULT_CONFIG) for pid in CORPUS_IDS]
    ok = 0
    for i in range(10_000):
        mode = i % 3
        if mode == 0:
            text = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 120))).decode("latin-1")
        elif mode == 1:
            text = "".join(chr(rng.randrange(32, 127)) for _ in range(rng.randrange(0, 200)))
        else:
            src = list(rng.choice(corpus_sources))
            for _ in range(rng.randrange(1, 6)):
                pos = rng.randrange(len(src))
                src[pos] = chr(rng.randrange(256))
            text = "".join(src)
        try:
            spec = parse_policy(text)
            assert isinstance(spec, PolicySpec)
        except ParseError:
            pass
        ok += 1
    elapsed = time.monotonic() - start
    assert ok == 10_000
    assert elapsed < 60.0, f"fuzzing took {elapsed:.1f}s"
    _pass(f"criterion 9: 10000 fuzz inputs -> PolicySpec or ParseError, no crash ({elapsed:.1f}s)")


def test_criterion_10_fail_closed():
    cp = compile_corpus_policy("MsgCntLmt", DEFAULT_CONFIG)
    trace = sends_every(MS_PER_SECOND, 20)
    res = run(trace, cp, DEFAULT_CONFIG, channel_connected=False)
    assert all(v.decision == "Blocked" and v.reason == "ChannelError" for v in res.verdicts)

    cp_local = compile_corpus_policy("WiFiLmt", DEFAULT_CONFIG)
    wifi_trace = [wifi(9 * MS_PER_HOUR, True), wifi(14 * MS_PER_HOUR, True)]
    res_local = run(wifi_trace, cp_local, DEFAULT_CONFIG, channel_connected=False)
    assert res_local.decisions() == ["Allowed", "Blocked"]
    assert res_local.verdicts[1].reason == "blockWifiAfterHours"
    _pass("criterion 10: disconnected channel blocks NeedsGlobal events with ChannelError; LocalOnly unaffected")
