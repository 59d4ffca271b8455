"""Name resolution and kind inference shared by the validator and compiler."""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from ..lang.check import InferenceIssue, LangError, TypeEnv, infer_state_types, type_check
from ..lang.nodes import Assign, AppendStmt, PruneStmt, SetAttrStmt
from ..lang.values import VType
from .ast import EventDecl, PolicySpec, Side, guard_refs

StateTypes = Dict[Tuple[str, str], VType]


def event_param_env(trigger: Optional[EventDecl], side: Side) -> TypeEnv:
    """Variables visible to a body of `side` when fired by `trigger`.

    State variable kinds are layered on top by the caller. ApplicationSide
    bodies see the clock, the app identity and the trigger's parameters;
    GlobalSide bodies see the clock plus explicitly forwarded parameters.
    """
    env: TypeEnv = {("ctx", "now"): VType.TIMESTAMP}
    if side is Side.APPLICATION:
        env[("ctx", "app_name")] = VType.STRING
        env[("ctx", "app_id")] = VType.STRING
    if trigger is not None:
        for p in trigger.params:
            env[("event", p.name)] = p.vtype
    return env


def action_uses(spec: PolicySpec) -> Dict[str, List[Optional[EventDecl]]]:
    """Action name -> trigger declarations of the rules that run it."""
    events = {e.name: e for e in spec.events}
    uses: Dict[str, List[Optional[EventDecl]]] = {a.name: [] for a in spec.actions}
    for rule in spec.rules:
        trigger = events.get(rule.trigger)
        for name in rule.actions:
            if name in uses:
                uses[name].append(trigger)
    return uses


def condition_uses(spec: PolicySpec) -> Dict[str, List[Optional[EventDecl]]]:
    events = {e.name: e for e in spec.events}
    uses: Dict[str, List[Optional[EventDecl]]] = {c.name: [] for c in spec.conditions}
    for rule in spec.rules:
        trigger = events.get(rule.trigger)
        for ref in guard_refs(rule.guard):
            if ref.name in uses:
                uses[ref.name].append(trigger)
    return uses


def _use_envs(decl_side: Side, triggers: List[Optional[EventDecl]]) -> List[TypeEnv]:
    envs: List[TypeEnv] = []
    seen = set()
    for trigger in triggers:
        key = trigger.name if trigger is not None else None
        if key in seen:
            continue
        seen.add(key)
        envs.append(event_param_env(trigger, decl_side))
    if not envs:
        envs.append(event_param_env(None, decl_side))
    return envs


def infer_policy_state(spec: PolicySpec) -> Tuple[StateTypes, List[InferenceIssue]]:
    """Kinds of every local/global variable and device attribute the policy
    writes. Attribute kinds are keyed under the "attr" pseudo-namespace."""
    uses = action_uses(spec)
    assignments = []
    for action in spec.actions:
        envs = _use_envs(action.side, uses.get(action.name, []))
        for stmt in action.body:
            if isinstance(stmt, (Assign, AppendStmt, PruneStmt)):
                assignments.append((stmt, envs))
    types, issues = infer_state_types(assignments)

    for action in spec.actions:
        envs = _use_envs(action.side, uses.get(action.name, []))
        for stmt in action.body:
            if not isinstance(stmt, SetAttrStmt):
                continue
            kind: Optional[VType] = None
            for env in envs:
                merged = dict(env)
                merged.update(types)
                try:
                    kind = type_check(stmt.value, merged)
                    break
                except LangError:
                    continue
            if kind is None:
                continue  # surfaced later as a per-use typing error
            key = ("attr", stmt.attr)
            prior = types.get(key)
            if prior is not None and prior is not kind:
                issues.append(
                    InferenceIssue(stmt.span, f"attribute {stmt.attr} written as both {prior} and {kind}")
                )
            else:
                types[key] = kind
    return types, issues
