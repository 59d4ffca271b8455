"""Randomized engine-vs-oracle agreement (the full 200-trace sweep lives in
the acceptance suite; this is the fast everyday version)."""

import pytest

from dcmon.config import DEFAULT_CONFIG
from dcmon.corpus import CORPUS_IDS, compile_corpus_policy, oracle_verdicts
from dcmon.sim import run
from dcmon.tracegen import PROFILES, make_trace

TRACES = [make_trace(20_000 + i) for i in range(25)] + [
    make_trace(30_000 + i, profile=p) for i, p in enumerate(PROFILES)
]


@pytest.mark.parametrize("pid", CORPUS_IDS)
def test_engine_matches_oracle(pid):
    cp = compile_corpus_policy(pid)
    for idx, trace in enumerate(TRACES):
        got = run(trace, cp, DEFAULT_CONFIG).decisions()
        want = oracle_verdicts(pid, trace, DEFAULT_CONFIG)
        assert got == want, f"trace {idx} diverges"


def test_traces_exercise_blocking_paths():
    blocked = {pid: 0 for pid in CORPUS_IDS}
    for pid in CORPUS_IDS:
        for trace in TRACES:
            blocked[pid] += oracle_verdicts(pid, trace, DEFAULT_CONFIG).count("Blocked")
    silent = [pid for pid, count in blocked.items() if count == 0]
    assert not silent, f"policies never blocked by the random traces: {silent}"
