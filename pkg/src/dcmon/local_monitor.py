"""Per-application monitor.

Each app owns one LocalMonitor with isolated local state. LocalOnly rules
are decided entirely here; NeedsGlobal rules evaluate their ApplicationSide
conditions locally, ship the truth values (plus any explicitly forwarded
event bindings) to the central monitor, and run whatever ApplicationSide
actions the reply instructs.

Failure handling is fail-closed: if the channel is down, any occurrence
that triggers a NeedsGlobal rule is blocked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .central_monitor import Channel, ChannelError
from .dsl.ast import EventDecl, Phase
from .engine import CompiledPolicy, CompiledRule, Locality, evaluate_guard, rules_for
from .lang.eval import (
    APP_SIDE,
    BlockCall,
    EffectList,
    EvalContext,
    EvalError,
    eval_expr,
    exec_stmts,
)
from .lang.state import VarStore
from .lang.values import Value

PROCEED = "Proceed"
BLOCK = "Block"

# per-app monitor store, never shared between apps
LocalState = VarStore


class ArityMismatch(Exception):
    pass


@dataclass(frozen=True)
class EventOccurrence:
    app_id: str
    app_name: str
    namespace: str
    method: str
    phase: Phase
    args: Tuple[Value, ...]
    return_value: Optional[Value]
    t: int

    @property
    def call(self) -> str:
        return f"{self.namespace}.{self.method}"


@dataclass
class InterceptResult:
    decision: str
    effects: EffectList = field(default_factory=list)
    reason: Optional[str] = None
    faults: Tuple[str, ...] = ()

    @property
    def blocked(self) -> bool:
        return self.decision == BLOCK


def bind_params(occ: EventOccurrence, decl: EventDecl) -> Dict[str, Value]:
    """Positional argument bindings plus the uponReturning binding."""
    out: Dict[str, Value] = {}
    positional = decl.pattern.params
    if positional is not None:
        if len(positional) != len(occ.args):
            raise ArityMismatch(
                f"{decl.name} declares {len(positional)} parameters, call has {len(occ.args)} arguments"
            )
        for p, v in zip(positional, occ.args):
            out[p.name] = v
    if decl.return_binding is not None and occ.phase is Phase.AFTER:
        out[decl.return_binding] = occ.return_value
    return out


def pattern_matches(decl: EventDecl, occ: EventOccurrence) -> bool:
    pattern = decl.pattern
    if pattern.api_namespace != occ.namespace or pattern.method != occ.method:
        return False
    if decl.phase is not occ.phase:
        return False
    arity = pattern.arg_arity
    return arity is None or arity == len(occ.args)


class LocalMonitor:
    def __init__(self, app_id: str, app_name: str, cp: CompiledPolicy, channel: Optional[Channel]):
        self.app_id = app_id
        self.app_name = app_name
        self.cp = cp
        self.channel = channel
        self.local = LocalState()

    def intercept(self, occ: EventOccurrence) -> InterceptResult:
        """Run every rule triggered by this occurrence, in declaration
        order, each guard seeing the state left by earlier rules."""
        result = InterceptResult(decision=PROCEED)
        for rule in rules_for(self.cp, occ.namespace, occ.method, occ.phase):
            event = self.cp.event_of(rule)
            if not pattern_matches(event, occ):
                continue
            self._run_rule(rule, event, occ, result)
        return result

    # internals

    def _ctx(self, occ: EventOccurrence, bindings: Dict[str, Value]) -> EvalContext:
        return EvalContext(
            side=APP_SIDE,
            now=occ.t,
            state_types=self.cp.state_types,
            app_id=self.app_id,
            app_name=self.app_name,
            event_bindings=bindings,
            local=self.local,
        )

    def _block(self, result: InterceptResult, reason: str) -> None:
        if not result.blocked:
            result.decision = BLOCK
            result.reason = reason

    def _fault(self, result: InterceptResult, fault: str) -> None:
        result.faults = result.faults + (fault,)

    def _run_rule(
        self,
        rule: CompiledRule,
        event: EventDecl,
        occ: EventOccurrence,
        result: InterceptResult,
    ) -> None:
        bindings = bind_params(occ, event)
        ctx = self._ctx(occ, bindings)

        truth: Dict[int, bool] = {}
        try:
            for cid in rule.app_condition_ids:
                truth[cid] = bool(eval_expr(self.cp.conditions[cid].body, ctx))
        except EvalError as ex:
            fault = f"EvalError:{ex.code}"
            self._fault(result, fault)
            self._block(result, fault)
            return

        if rule.locality is Locality.LOCAL_ONLY:
            if evaluate_guard(rule.guard, truth):
                self._run_app_actions(rule, rule.action_ids, ctx, occ, result)
            return

        forwarded = {p: bindings[p] for p in rule.forwarded_params if p in bindings}
        if self.channel is None:
            self._fault(result, "ChannelError")
            self._block(result, "ChannelError")
            return
        try:
            reply = self.channel.request(self.app_id, rule.rule_id, occ.t, truth, forwarded)
        except ChannelError:
            self._fault(result, "ChannelError")
            self._block(result, "ChannelError")
            return
        if reply.fault is not None:
            self._fault(result, reply.fault)
            if rule.blocks:
                self._block(result, reply.fault)
            return
        if reply.guard_result:
            self._run_app_actions(rule, reply.appside_actions_to_run, ctx, occ, result)

    def _run_app_actions(
        self,
        rule: CompiledRule,
        action_ids,
        ctx: EvalContext,
        occ: EventOccurrence,
        result: InterceptResult,
    ) -> None:
        for aid in action_ids:
            if aid not in rule.app_action_ids:
                continue
            try:
                effects = exec_stmts(self.cp.actions[aid].body, ctx)
            except EvalError as ex:
                fault = f"EvalError:{ex.code}"
                self._fault(result, fault)
                self._block(result, fault)
                return
            for eff in effects:
                result.effects.append(eff)
                if isinstance(eff, BlockCall) and occ.phase is Phase.BEFORE:
                    # validation rejects blocking actions on after-phase
                    # rules; nothing to suppress once the call returned
                    self._block(result, rule.name)
