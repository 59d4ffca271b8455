"""Central monitor: owner of global state and the request/reply channel.

The channel is app-initiated only. A local monitor submits a request and
blocks for the reply; the central monitor handles one request at a time and
never sends anything unsolicited, so every central-to-app log entry is the
reply to the immediately preceding request with the same seq.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .engine import CompiledPolicy, MissingTruthValue, evaluate_guard
from .lang.eval import GLOBAL_SIDE, EvalContext, EvalError, eval_expr, exec_stmts
from .lang.state import VarStore
from .lang.values import Value, VType, value_to_json

APP_TO_CENTRAL = "AppToCentral"
CENTRAL_TO_APP = "CentralToApp"


class ChannelError(Exception):
    """The central monitor is unreachable."""


@dataclass
class GlobalState:
    vars: VarStore = field(default_factory=VarStore)
    attrs: VarStore = field(default_factory=VarStore)

    def copy(self) -> "GlobalState":
        return GlobalState(vars=self.vars.copy(), attrs=self.attrs.copy())


def snapshot(gs: GlobalState) -> str:
    """Canonical byte-stable serialization; equal iff states are equal."""
    doc = {
        "vars": {
            name: {"kind": kind.value, "value": value_to_json(kind, value)}
            for name, kind, value in gs.vars.items_typed()
        },
        "attrs": {
            name: {"kind": kind.value, "value": value_to_json(kind, value)}
            for name, kind, value in gs.attrs.items_typed()
        },
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


_SCALAR_BYTES = {VType.BOOL: 1, VType.INT: 8, VType.TIMESTAMP: 8, VType.DURATION: 8}


def _var_row(kind: VType, value: Value) -> Dict[str, object]:
    if kind is VType.TS_LIST:
        return {"kind": kind.value, "elements": len(value), "bytes": 8 * len(value)}
    if kind is VType.STRING:
        return {"kind": kind.value, "elements": 1, "bytes": len(value.encode("utf-8"))}
    return {"kind": kind.value, "elements": 1, "bytes": _SCALAR_BYTES[kind]}


def state_size(gs: GlobalState) -> Dict[str, object]:
    """Per-variable element counts and byte estimates."""
    vars_report = {name: _var_row(kind, value) for name, kind, value in gs.vars.items_typed()}
    attrs_report = {name: _var_row(kind, value) for name, kind, value in gs.attrs.items_typed()}
    total = sum(r["bytes"] for r in vars_report.values()) + sum(r["bytes"] for r in attrs_report.values())
    return {"vars": vars_report, "attrs": attrs_report, "total_bytes": total}


@dataclass(frozen=True)
class MonitorRequest:
    seq: int
    app_id: str
    rule_id: int
    t: int
    appside_truth: Dict[int, bool]
    forwarded_bindings: Dict[str, Value]


@dataclass(frozen=True)
class MonitorReply:
    seq: int
    guard_result: bool
    appside_actions_to_run: Tuple[int, ...]
    fault: Optional[str] = None


@dataclass(frozen=True)
class ChannelLogEntry:
    direction: str
    seq: int
    t: int
    app_id: str
    rule_id: int
    payload: Dict[str, object]

    def to_json(self) -> str:
        return json.dumps(
            {
                "direction": self.direction,
                "seq": self.seq,
                "t": self.t,
                "app_id": self.app_id,
                "rule_id": self.rule_id,
                "payload": self.payload,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def check_asymmetry(entries: List[ChannelLogEntry]) -> List[str]:
    """Violations of the app-initiated protocol; empty list means clean."""
    problems = []
    open_request: Optional[ChannelLogEntry] = None
    for i, e in enumerate(entries):
        if e.direction == APP_TO_CENTRAL:
            if open_request is not None:
                problems.append(f"entry {i}: request seq {e.seq} before reply to seq {open_request.seq}")
            open_request = e
        else:
            if open_request is None:
                problems.append(f"entry {i}: unsolicited reply seq {e.seq}")
            elif e.seq != open_request.seq or e.app_id != open_request.app_id:
                problems.append(
                    f"entry {i}: reply seq {e.seq} to {e.app_id} does not match request seq "
                    f"{open_request.seq} from {open_request.app_id}"
                )
            open_request = None
    if open_request is not None:
        problems.append(f"request seq {open_request.seq} never answered")
    return problems


class CentralMonitor:
    """Evaluates GlobalSide guard parts and runs GlobalSide actions,
    strictly one request at a time."""

    def __init__(self, cp: CompiledPolicy, gs: GlobalState, log: Optional[List[ChannelLogEntry]] = None):
        self.cp = cp
        self.gs = gs
        self.log: List[ChannelLogEntry] = log if log is not None else []
        self._lock = threading.Lock()

    def handle_request(self, req: MonitorRequest) -> MonitorReply:
        with self._lock:
            self.log.append(
                ChannelLogEntry(
                    direction=APP_TO_CENTRAL,
                    seq=req.seq,
                    t=req.t,
                    app_id=req.app_id,
                    rule_id=req.rule_id,
                    payload={
                        "appside_truth": {str(k): v for k, v in sorted(req.appside_truth.items())},
                        "forwarded_bindings": dict(sorted(req.forwarded_bindings.items())),
                    },
                )
            )
            reply = self._evaluate(req)
            self.log.append(
                ChannelLogEntry(
                    direction=CENTRAL_TO_APP,
                    seq=reply.seq,
                    t=req.t,
                    app_id=req.app_id,
                    rule_id=req.rule_id,
                    payload={
                        "guard_result": reply.guard_result,
                        "appside_actions_to_run": list(reply.appside_actions_to_run),
                        "fault": reply.fault,
                    },
                )
            )
            return reply

    def _evaluate(self, req: MonitorRequest) -> MonitorReply:
        rule = self.cp.rule_by_id(req.rule_id)
        if rule is None:
            return MonitorReply(req.seq, False, (), fault="UnknownRule")
        if set(req.appside_truth) != set(rule.app_condition_ids):
            return MonitorReply(req.seq, False, (), fault="StaleTruthMap")
        ctx = EvalContext(
            side=GLOBAL_SIDE,
            now=req.t,
            state_types=self.cp.state_types,
            event_bindings=dict(req.forwarded_bindings),
            global_vars=self.gs.vars,
            attrs=self.gs.attrs,
        )
        truth = dict(req.appside_truth)
        try:
            for cid in rule.global_condition_ids:
                truth[cid] = bool(eval_expr(self.cp.conditions[cid].body, ctx))
            guard = evaluate_guard(rule.guard, truth)
        except (EvalError, MissingTruthValue) as ex:
            return MonitorReply(req.seq, False, (), fault=f"EvalFault:{ex}")
        if not guard:
            return MonitorReply(req.seq, False, ())
        try:
            for aid in rule.action_ids:
                if aid in rule.global_action_ids:
                    exec_stmts(self.cp.actions[aid].body, ctx)
        except EvalError as ex:
            return MonitorReply(req.seq, False, (), fault=f"EvalFault:{ex}")
        app_actions = tuple(aid for aid in rule.action_ids if aid in rule.app_action_ids)
        return MonitorReply(req.seq, True, app_actions)


class Channel:
    """Synchronous in-process request/reply port shared by local monitors."""

    def __init__(self, central: CentralMonitor):
        self.central = central
        self.connected = True
        self._seq_lock = threading.Lock()
        self._next_seq = 0

    def disconnect(self) -> None:
        self.connected = False

    def reconnect(self) -> None:
        self.connected = True

    def request(
        self,
        app_id: str,
        rule_id: int,
        t: int,
        appside_truth: Dict[int, bool],
        forwarded_bindings: Dict[str, Value],
    ) -> MonitorReply:
        if not self.connected:
            raise ChannelError("central monitor unreachable")
        with self._seq_lock:
            seq = self._next_seq
            self._next_seq += 1
        req = MonitorRequest(
            seq=seq,
            app_id=app_id,
            rule_id=rule_id,
            t=t,
            appside_truth=dict(appside_truth),
            forwarded_bindings=dict(forwarded_bindings),
        )
        return self.central.handle_request(req)


def replay_requests(
    cp: CompiledPolicy,
    entries: List[ChannelLogEntry],
    initial: Optional[GlobalState] = None,
) -> GlobalState:
    """Rebuild global state by re-handling the logged requests in order.

    Device-side attribute writes (catalog effects, app-side set_attr) are
    not channel traffic; start from `initial` when the trace includes them.
    """
    gs = initial.copy() if initial is not None else GlobalState()
    central = CentralMonitor(cp, gs)
    for e in entries:
        if e.direction != APP_TO_CENTRAL:
            continue
        truth = {int(k): v for k, v in e.payload["appside_truth"].items()}
        bindings = dict(e.payload["forwarded_bindings"])
        central.handle_request(
            MonitorRequest(
                seq=e.seq,
                app_id=e.app_id,
                rule_id=e.rule_id,
                t=e.t,
                appside_truth=truth,
                forwarded_bindings=bindings,
            )
        )
    return gs
