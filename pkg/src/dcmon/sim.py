"""Discrete-event device simulator.

Replays a timestamped trace of API calls through per-app local monitors and
the central monitor, producing the verdict log (one allowed/blocked entry
per trace event), the final global-state snapshot, and the channel log.

For each trace event the clock advances to the event time, the before-phase
occurrence is intercepted, and only if no rule blocked it does the catalog
effect execute, followed by the after-phase occurrence carrying the return
value. A blocked call therefore leaves no device effect and no after
occurrence.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .catalog import CATALOG, DeviceState, arg_matches, execute_effect
from .central_monitor import (
    Channel,
    ChannelLogEntry,
    CentralMonitor,
    GlobalState,
    check_asymmetry,
    snapshot,
)
from .config import SimConfig
from .dsl.ast import Phase
from .engine import CompiledPolicy
from .lang.eval import SetAttr
from .lang.state import VarStore
from .lang.values import Value

ALLOWED = "Allowed"
BLOCKED = "Blocked"
NO_RULE = "no rule"


class TraceFormatError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsortedTrace(TraceFormatError):
    def __init__(self, line: int):
        super().__init__(line, "timestamps must be nondecreasing")


class CatalogMismatch(Exception):
    pass


@dataclass(frozen=True)
class TraceEvent:
    t: int
    app: str
    namespace: str
    method: str
    args: Tuple[Value, ...]

    @property
    def call(self) -> str:
        return f"{self.namespace}.{self.method}"

    def to_json(self) -> str:
        return json.dumps(
            {"t_ms": self.t, "app": self.app, "call": self.call, "args": list(self.args)},
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass
class VerdictEntry:
    t: int
    app: str
    call: str
    decision: str
    reason: str
    latency_ns: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "t_ms": self.t,
                "app": self.app,
                "call": self.call,
                "decision": self.decision,
                "reason": self.reason,
                "latency_ns": self.latency_ns,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def parse_trace(text: str) -> List[TraceEvent]:
    events: List[TraceEvent] = []
    last_t = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as ex:
            raise TraceFormatError(lineno, f"invalid JSON: {ex.msg}") from ex
        if not isinstance(doc, dict):
            raise TraceFormatError(lineno, "event must be a JSON object")
        missing = {"t_ms", "app", "call", "args"} - set(doc)
        if missing:
            raise TraceFormatError(lineno, f"missing fields: {', '.join(sorted(missing))}")
        t = doc["t_ms"]
        if not isinstance(t, int) or isinstance(t, bool) or t < 0:
            raise TraceFormatError(lineno, "t_ms must be a nonnegative integer")
        app = doc["app"]
        if not isinstance(app, str) or not app:
            raise TraceFormatError(lineno, "app must be a nonempty string")
        call = doc["call"]
        if not isinstance(call, str) or call.count(".") != 1:
            raise TraceFormatError(lineno, "call must look like Namespace.method")
        namespace, method = call.split(".")
        args = doc["args"]
        if not isinstance(args, list):
            raise TraceFormatError(lineno, "args must be a list")
        if last_t is not None and t < last_t:
            raise UnsortedTrace(lineno)
        last_t = t
        events.append(TraceEvent(t=t, app=app, namespace=namespace, method=method, args=tuple(args)))
    return events


def load_trace(path) -> List[TraceEvent]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace(fh.read())


def write_trace(path, trace: List[TraceEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in trace:
            fh.write(ev.to_json() + "\n")


def check_policy_against_catalog(cp: CompiledPolicy) -> None:
    """Every declared event pattern must name a catalog entry and agree
    with its parameter and return types."""
    for event in cp.events:
        entry = CATALOG.get((event.pattern.api_namespace, event.pattern.method))
        if entry is None:
            raise CatalogMismatch(f"event {event.name!r} intercepts unknown API {event.pattern.api_namespace}.{event.pattern.method}")
        params = event.pattern.params
        if params is not None:
            declared = tuple(p.vtype for p in params)
            if declared != entry.param_types:
                raise CatalogMismatch(
                    f"event {event.name!r} declares parameter types "
                    f"({', '.join(str(t) for t in declared)}) but {entry.call} takes "
                    f"({', '.join(str(t) for t in entry.param_types)})"
                )
        if event.return_binding is not None:
            binding = event.param_named(event.return_binding)
            if binding is not None and binding.vtype is not entry.return_type:
                raise CatalogMismatch(
                    f"event {event.name!r} binds the return of {entry.call} as {binding.vtype}, "
                    f"which returns {entry.return_type}"
                )


def _check_trace_against_catalog(trace: List[TraceEvent]) -> None:
    for idx, ev in enumerate(trace):
        if idx and ev.t < trace[idx - 1].t:
            raise UnsortedTrace(idx + 1)
        entry = CATALOG.get((ev.namespace, ev.method))
        if entry is None:
            raise CatalogMismatch(f"trace event {idx} calls unknown API {ev.call}")
        if len(ev.args) != len(entry.param_types):
            raise CatalogMismatch(
                f"trace event {idx}: {ev.call} takes {len(entry.param_types)} arguments, got {len(ev.args)}"
            )
        for pos, (vt, value) in enumerate(zip(entry.param_types, ev.args)):
            if not arg_matches(vt, value):
                raise CatalogMismatch(
                    f"trace event {idx}: argument {pos} of {ev.call} must be {vt}, got {value!r}"
                )


@dataclass
class RunResult:
    verdicts: List[VerdictEntry]
    snapshot: str
    channel_entries: List[ChannelLogEntry]
    global_state: Optional[GlobalState]
    initial_global: Optional[GlobalState]
    device: DeviceState
    local_states: Dict[str, VarStore]
    arrival_order: List[int]
    faults: List[Tuple[int, str]] = field(default_factory=list)

    def decisions(self) -> List[str]:
        return [v.decision for v in self.verdicts]

    def verdict_lines(self) -> str:
        return "".join(v.to_json() + "\n" for v in self.verdicts)

    def channel_lines(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.channel_entries)


def run(
    trace: List[TraceEvent],
    cp: CompiledPolicy,
    config: Optional[SimConfig] = None,
    *,
    measure_latency: bool = False,
    concurrent_same_t: bool = False,
    arrival_order: Optional[List[int]] = None,
    channel_connected: bool = True,
) -> RunResult:
    """Monitored replay. Deterministic for a given (trace, policy, config,
    arrival order); latencies are reported as 0 unless measurement is on,
    keeping output files byte-stable across runs."""
    check_policy_against_catalog(cp)
    _check_trace_against_catalog(trace)

    # imported here to keep module load order simple
    from .local_monitor import EventOccurrence, LocalMonitor

    device = DeviceState()
    gs = GlobalState(vars=VarStore(), attrs=device.attrs)
    initial = gs.copy()
    log: List[ChannelLogEntry] = []
    central = CentralMonitor(cp, gs, log)
    channel = Channel(central)
    if not channel_connected:
        channel.disconnect()
    monitors: Dict[str, LocalMonitor] = {
        app: LocalMonitor(app, app, cp, channel) for app in sorted({ev.app for ev in trace})
    }
    verdicts: List[Optional[VerdictEntry]] = [None] * len(trace)
    faults: List[Tuple[int, str]] = []
    faults_lock = threading.Lock()

    def process(idx: int) -> None:
        ev = trace[idx]
        entry = CATALOG[(ev.namespace, ev.method)]
        monitor = monitors[ev.app]
        t0 = time.perf_counter_ns() if measure_latency else 0
        occ_before = EventOccurrence(
            app_id=ev.app, app_name=ev.app, namespace=ev.namespace, method=ev.method,
            phase=Phase.BEFORE, args=ev.args, return_value=None, t=ev.t,
        )
        before = monitor.intercept(occ_before)
        _route_attr_effects(before.effects, device)
        event_faults = list(before.faults)
        if before.blocked:
            decision, reason = BLOCKED, before.reason or NO_RULE
        else:
            ret = execute_effect(entry, ev.args, device)
            occ_after = EventOccurrence(
                app_id=ev.app, app_name=ev.app, namespace=ev.namespace, method=ev.method,
                phase=Phase.AFTER, args=ev.args, return_value=ret, t=ev.t,
            )
            after = monitor.intercept(occ_after)
            _route_attr_effects(after.effects, device)
            event_faults.extend(after.faults)
            decision, reason = ALLOWED, NO_RULE
        latency = time.perf_counter_ns() - t0 if measure_latency else 0
        verdicts[idx] = VerdictEntry(ev.t, ev.app, ev.call, decision, reason, latency)
        if event_faults:
            with faults_lock:
                faults.extend((idx, f) for f in event_faults)

    order = _execution_order(trace, concurrent_same_t, arrival_order, process)

    problems = check_asymmetry(log)
    if problems:
        raise RuntimeError("channel asymmetry violated: " + "; ".join(problems))
    return RunResult(
        verdicts=[v for v in verdicts if v is not None],
        snapshot=snapshot(gs),
        channel_entries=log,
        global_state=gs,
        initial_global=initial,
        device=device,
        local_states={app: m.local for app, m in monitors.items()},
        arrival_order=order,
        faults=sorted(faults),
    )


def _execution_order(trace, concurrent_same_t, arrival_order, process) -> List[int]:
    if arrival_order is not None:
        if sorted(arrival_order) != list(range(len(trace))):
            raise ValueError("arrival_order must be a permutation of trace indices")
        for idx in arrival_order:
            process(idx)
        return list(arrival_order)
    if not concurrent_same_t:
        for idx in range(len(trace)):
            process(idx)
        return list(range(len(trace)))

    # Same-timestamp events of different apps race; a device-wide lock
    # keeps each whole event (before, effect, after) atomic and the grant
    # order is recorded so the run can be replayed exactly.
    order: List[int] = []
    event_lock = threading.Lock()
    worker_errors: List[BaseException] = []

    def worker(indices: List[int]) -> None:
        try:
            for idx in indices:
                with event_lock:
                    order.append(idx)
                    process(idx)
        except BaseException as ex:  # re-raised on the main thread
            worker_errors.append(ex)

    i = 0
    while i < len(trace):
        j = i
        while j < len(trace) and trace[j].t == trace[i].t:
            j += 1
        group = list(range(i, j))
        by_app: Dict[str, List[int]] = {}
        for idx in group:
            by_app.setdefault(trace[idx].app, []).append(idx)
        if len(by_app) <= 1:
            for idx in group:
                order.append(idx)
                process(idx)
        else:
            threads = [threading.Thread(target=worker, args=(indices,)) for indices in by_app.values()]
            for th in threads:
                th.start()
            for th in threads:
                th.join()
            if worker_errors:
                raise worker_errors[0]
        i = j
    return order


def _route_attr_effects(effects, device: DeviceState) -> None:
    # App-side set_attr effects model the monitor driving a device API;
    # they reach the attribute table without any channel traffic.
    for eff in effects:
        if isinstance(eff, SetAttr):
            device.attrs.set(eff.name, eff.kind, eff.value)


def run_unmonitored(
    trace: List[TraceEvent],
    config: Optional[SimConfig] = None,
    *,
    measure_latency: bool = False,
) -> RunResult:
    """Baseline replay with monitoring disabled: every call proceeds."""
    _check_trace_against_catalog(trace)
    device = DeviceState()
    verdicts: List[VerdictEntry] = []
    for ev in trace:
        entry = CATALOG[(ev.namespace, ev.method)]
        t0 = time.perf_counter_ns() if measure_latency else 0
        execute_effect(entry, ev.args, device)
        latency = time.perf_counter_ns() - t0 if measure_latency else 0
        verdicts.append(VerdictEntry(ev.t, ev.app, ev.call, ALLOWED, NO_RULE, latency))
    gs = GlobalState(vars=VarStore(), attrs=device.attrs)
    return RunResult(
        verdicts=verdicts,
        snapshot=snapshot(gs),
        channel_entries=[],
        global_state=gs,
        initial_global=None,
        device=device,
        local_states={},
        arrival_order=list(range(len(trace))),
    )


def usage_sessions(trace: List[TraceEvent], idle_threshold_ms: int) -> List[Tuple[int, int]]:
    """Partition device activity into sittings; a gap of at least the idle
    threshold ends the current sitting."""
    sessions: List[List[int]] = []
    last_t: Optional[int] = None
    for ev in trace:
        if last_t is None or ev.t - last_t >= idle_threshold_ms:
            sessions.append([ev.t, ev.t])
        else:
            sessions[-1][1] = ev.t
        last_t = ev.t
    return [(s, e) for s, e in sessions]
