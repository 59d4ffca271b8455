"""The shipped policy corpus.

Ten device policies, each available as generated DSL source (constants such
as the home dialing prefix or the URL blocklist are baked in from a
SimConfig) and paired with an independent oracle in oracles.py. The files
under policies/ are the default-config renderings plus a manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Tuple

from ..config import DEFAULT_CONFIG, SimConfig
from ..dsl import parse_policy, validate_policy
from ..engine import CompiledPolicy
from ..dsl.lexer import escape_string
from ..lang.values import MS_PER_MINUTE, MS_PER_SECOND
from ..sim import TraceEvent
from . import oracles

GAME_PREFIX = oracles.GAME_PREFIX


class UnknownPolicyId(Exception):
    pass


class CorpusGenerationError(Exception):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    category: str
    scenario_tags: Tuple[str, ...]
    description: str
    policy_source: str
    oracle: Callable[[List[TraceEvent], SimConfig], List[str]]


def _or_chain(terms: List[str]) -> str:
    return " || ".join(terms) if terms else "false"


def _duration_literal(ms: int) -> str:
    if ms % MS_PER_MINUTE == 0:
        return f"minutes({ms // MS_PER_MINUTE})"
    if ms % MS_PER_SECOND == 0:
        return f"seconds({ms // MS_PER_SECOND})"
    raise CorpusGenerationError(f"duration {ms}ms is not a whole number of seconds")


def _src_phone_ext_blk(cfg: SimConfig) -> str:
    home = escape_string(cfg.home_country_code)
    return f"""// PhoneExtBlk: calls to foreign numbers are denied
Events {{
    ApplicationSide {{
        dialBefore() = {{
            TelephonyManager *.dialCall(string number)
        }}
    }}
}}
Conditions {{
    ApplicationSide {{
        isForeignNumber = {{ starts_with(number, "+") && !starts_with(number, {home}) }}
    }}
}}
Actions {{
    ApplicationSide {{
        blockCall = {{ block(); }}
    }}
}}
Rules {{
    blockForeignCalls = dialBefore() | isForeignNumber -> blockCall();
}}
"""


def _src_url_blk_req(cfg: SimConfig) -> str:
    terms = [f"contains(url, {escape_string(frag)})" for frag in cfg.url_blocklist]
    return f"""// URLBlkReq: requests for listed content are denied
Events {{
    ApplicationSide {{
        urlBefore() = {{
            WebBrowser *.requestUrl(string url)
        }}
    }}
}}
Conditions {{
    ApplicationSide {{
        isListedUrl = {{ {_or_chain(terms)} }}
    }}
}}
Actions {{
    ApplicationSide {{
        blockUrl = {{ block(); }}
    }}
}}
Rules {{
    blockListedUrls = urlBefore() | isListedUrl -> blockUrl();
}}
"""


def _src_wifi_lmt(cfg: SimConfig) -> str:
    if cfg.work_hours is not None:
        start, end = cfg.work_hours
        cond_name = "inWorkHours"
        predicate = f"hour_of_day(now) >= {start} && hour_of_day(now) < {end}"
    else:
        cond_name = "isTooEarly"
        predicate = "hour_of_day(now) > 1 && is_pm(now)"
    return f"""// WiFiLmt: wifi cannot be turned on during restricted hours
Events {{
    ApplicationSide {{
        onWifiEnable() = {{
            WifiManager *.setWifiEnabled(bool enabled)
        }}
    }}
}}
Conditions {{
    ApplicationSide {{
        areEnabledRequests = {{ enabled == true }}
        {cond_name} = {{ {predicate} }}
    }}
}}
Actions {{
    ApplicationSide {{
        blockWifiRequest = {{
            set_attr("wifi_enabled", false);
            block();
        }}
    }}
}}
Rules {{
    blockWifiAfterHours = onWifiEnable() | areEnabledRequests && {cond_name} -> blockWifiRequest();
}}
"""


def _src_file_access_lmt(cfg: SimConfig) -> str:
    clauses = []
    for prefix in cfg.protected_paths:
        allowed = [f"app_id == {escape_string(a)}" for a in cfg.authorized_apps.get(prefix, ())]
        guard = f"starts_with(path, {escape_string(prefix)})"
        if allowed:
            clauses.append(f"({guard} && !({_or_chain(allowed)}))")
        else:
            clauses.append(f"({guard})")
    return f"""// FileAccessLmt: protected folders only open for authorized apps
Events {{
    ApplicationSide {{
        openBefore() = {{
            FileSystem *.openFile(string path, string mode)
        }}
    }}
}}
Conditions {{
    ApplicationSide {{
        unauthorizedAccess = {{ {_or_chain(clauses)} }}
    }}
}}
Actions {{
    ApplicationSide {{
        blockOpen = {{ block(); }}
    }}
}}
Rules {{
    blockUnauthorizedOpens = openBefore() | unauthorizedAccess -> blockOpen();
}}
"""


def _src_phone_time_lim(cfg: SimConfig) -> str:
    return """// PhoneTimeLim: at most four hours of calls per day, device-wide
Events {
    ApplicationSide {
        dialBefore() = {
            TelephonyManager *.dialCall(...)
        }
        endBefore() = {
            TelephonyManager *.endCall(...)
        }
    }
}
Conditions {
    GlobalSide {
        newCallDay = { !same_calendar_day(global.callDay, now) }
        callOngoing = { global.callActive }
        callQuotaUsed = { global.callMsToday >= hours(4) }
    }
}
Actions {
    GlobalSide {
        resetCallDayMid = {
            global.callMsToday := seconds(0);
            global.callDay := now;
            global.callStart := now - since_midnight(now);
        }
        resetCallDay = {
            global.callMsToday := seconds(0);
            global.callDay := now;
        }
        accrueOngoingCall = {
            global.callMsToday := global.callMsToday + (now - global.callStart);
            global.callStart := now;
        }
        markCallStart = {
            global.callActive := true;
            global.callStart := now;
        }
        accrueAndEndCall = {
            global.callMsToday := global.callMsToday + (now - global.callStart);
            global.callActive := false;
        }
    }
    ApplicationSide {
        blockDial = { block(); }
    }
}
Rules {
    carryCallDayOverDial = dialBefore() | newCallDay && callOngoing -> resetCallDayMid();
    freshCallDayOverDial = dialBefore() | newCallDay && !callOngoing -> resetCallDay();
    chargeOngoingAtDial = dialBefore() | callOngoing -> accrueOngoingCall();
    denyDialOverQuota = dialBefore() | callQuotaUsed -> blockDial();
    startCall = dialBefore() | !callQuotaUsed && !callOngoing -> markCallStart();
    carryCallDayOverEnd = endBefore() | newCallDay && callOngoing -> resetCallDayMid();
    freshCallDayOverEnd = endBefore() | newCallDay && !callOngoing -> resetCallDay();
    chargeAtEnd = endBefore() | callOngoing -> accrueAndEndCall();
}
"""


def _src_game_play_lmt(cfg: SimConfig) -> str:
    return f"""// GamePlayLmt: at most three hours of game play per day
Events {{
    ApplicationSide {{
        launchBefore() = {{
            AppLauncher *.launchApp(string target)
        }}
    }}
}}
Conditions {{
    GlobalSide {{
        newGameDay = {{ !same_calendar_day(global.gameDay, now) }}
        gameOngoing = {{ global.gameActive }}
        gameQuotaUsed = {{ global.gameMsToday >= hours(3) }}
    }}
    ApplicationSide {{
        launchesGame = {{ starts_with(target, {escape_string(GAME_PREFIX)}) }}
    }}
}}
Actions {{
    GlobalSide {{
        resetGameDayMid = {{
            global.gameMsToday := seconds(0);
            global.gameDay := now;
            global.gameStart := now - since_midnight(now);
        }}
        resetGameDay = {{
            global.gameMsToday := seconds(0);
            global.gameDay := now;
        }}
        accrueGameTime = {{
            global.gameMsToday := global.gameMsToday + (now - global.gameStart);
            global.gameStart := now;
        }}
        markGameForeground = {{
            global.gameActive := true;
            global.gameStart := now;
        }}
        clearGameForeground = {{
            global.gameActive := false;
        }}
    }}
    ApplicationSide {{
        blockLaunch = {{ block(); }}
    }}
}}
Rules {{
    carryGameDay = launchBefore() | newGameDay && gameOngoing -> resetGameDayMid();
    freshGameDay = launchBefore() | newGameDay && !gameOngoing -> resetGameDay();
    chargeGameTime = launchBefore() | gameOngoing -> accrueGameTime();
    denyLaunchOverQuota = launchBefore() | launchesGame && gameQuotaUsed -> blockLaunch();
    gameToForeground = launchBefore() | launchesGame && !gameQuotaUsed -> markGameForeground();
    otherToForeground = launchBefore() | !launchesGame -> clearGameForeground();
}}
"""


_SITTING_EVENTS = (
    ("smsUse", "SmsManager", "sendTextMessage"),
    ("wifiUse", "WifiManager", "setWifiEnabled"),
    ("dialUse", "TelephonyManager", "dialCall"),
    ("endUse", "TelephonyManager", "endCall"),
    ("webUse", "WebBrowser", "requestUrl"),
    ("fileUse", "FileSystem", "openFile"),
    ("launchUse", "AppLauncher", "launchApp"),
)


def _src_one_hr_per_sitting(cfg: SimConfig) -> str:
    idle = _duration_literal(cfg.idle_threshold_ms)
    events = "\n".join(
        f"""        {name}() = {{
            {ns} *.{method}(...)
        }}"""
        for name, ns, method in _SITTING_EVENTS
    )
    rules = []
    for name, _, _ in _SITTING_EVENTS:
        rules.append(f"    {name}EndIdle = {name}() | sitOngoing && idleElapsed -> endSitting();")
        rules.append(f"    {name}Start = {name}() | !sitOngoing -> startSitting();")
        rules.append(f"    {name}Deny = {name}() | sittingTooLong -> blockUse();")
        rules.append(f"    {name}Touch = {name}() | always -> touchSitting();")
    rules_text = "\n".join(rules)
    return f"""// OneHrPerSittingOnly: an hour of continuous use, then a rest
Events {{
    ApplicationSide {{
{events}
    }}
}}
Conditions {{
    GlobalSide {{
        sitOngoing = {{ global.sitActive }}
        idleElapsed = {{ now - global.lastUse >= {idle} }}
        sittingTooLong = {{ now - global.sitStart >= hours(1) }}
        always = {{ true }}
    }}
}}
Actions {{
    GlobalSide {{
        endSitting = {{ global.sitActive := false; }}
        startSitting = {{
            global.sitStart := now;
            global.sitActive := true;
        }}
        touchSitting = {{ global.lastUse := now; }}
    }}
    ApplicationSide {{
        blockUse = {{ block(); }}
    }}
}}
Rules {{
{rules_text}
}}
"""


def _src_msg_time_lmt(cfg: SimConfig) -> str:
    if cfg.msg_gap_anchor == "attempt":
        record_rules = "    recordAttempt = sendBefore() | always -> recordSend();"
        extra_conditions = "\n        always = { true }"
    else:
        record_rules = "    recordAllowed = sendBefore() | !hasPrior || !gapTooSmall -> recordSend();"
        extra_conditions = ""
    return f"""// MsgTimeLmt: a minute must pass between message requests
Events {{
    ApplicationSide {{
        sendBefore() = {{
            SmsManager *.sendTextMessage(...)
        }}
    }}
}}
Conditions {{
    GlobalSide {{
        hasPrior = {{ global.sentBefore }}
        gapTooSmall = {{ now - global.lastSend < minutes(1) }}{extra_conditions}
    }}
}}
Actions {{
    GlobalSide {{
        recordSend = {{
            global.lastSend := now;
            global.sentBefore := true;
        }}
    }}
    ApplicationSide {{
        blockSend = {{ block(); }}
    }}
}}
Rules {{
    denyRapidSend = sendBefore() | hasPrior && gapTooSmall -> blockSend();
{record_rules}
}}
"""


def _src_msg_cnt_lmt(cfg: SimConfig) -> str:
    return """// MsgCntLmt: at most 500 messages per day, device-wide
Events {
    ApplicationSide {
        sendMessageBefore() = {
            SmsManager *.sendTextMessage(...)
        }
        sendMessageAfter(bool sent) = {
            after SmsManager *.sendTextMessage(...)
        } uponReturning(sent)
    }
}
Conditions {
    GlobalSide {
        newMsgDay = { !same_calendar_day(global.msgDay, now) }
        maximumQuotaReached = { global.msgCount >= 500 }
    }
    ApplicationSide {
        successful = { sent == true }
    }
}
Actions {
    GlobalSide {
        resetMsgDay = {
            global.msgCount := 0;
            global.msgDay := now;
        }
        incrementMessageCount = {
            global.msgCount := global.msgCount + 1;
        }
    }
    ApplicationSide {
        blockRequest = { block(); }
    }
}
Rules {
    rollMsgDay = sendMessageBefore() | newMsgDay -> resetMsgDay();
    denySendOverQuota = sendMessageBefore() | maximumQuotaReached -> blockRequest();
    countSend = sendMessageAfter() | !maximumQuotaReached && successful -> incrementMessageCount();
}
"""


def _src_msg_cnt_lmt_hr(cfg: SimConfig) -> str:
    return """// MsgCntLmtHr: at most 100 messages in any sliding hour
Events {
    ApplicationSide {
        sendMessageBefore() = {
            SmsManager *.sendTextMessage(...)
        }
        sendMessageAfter(bool sent) = {
            after SmsManager *.sendTextMessage(...)
        } uponReturning(sent)
    }
}
Conditions {
    GlobalSide {
        hourQuotaReached = { count_within(global.sendTimes, hours(1)) >= 100 }
    }
    ApplicationSide {
        successful = { sent == true }
    }
}
Actions {
    GlobalSide {
        recordSendTime = {
            append(global.sendTimes, now);
            prune_older(global.sendTimes, hours(1));
        }
    }
    ApplicationSide {
        blockRequest = { block(); }
    }
}
Rules {
    denySendOverHourQuota = sendMessageBefore() | hourQuotaReached -> blockRequest();
    recordSend = sendMessageAfter() | !hourQuotaReached && successful -> recordSendTime();
}
"""


_DEFS = (
    ("PhoneExtBlk", "Prohibition", ("DC",), "Phone calls to foreign numbers are denied",
     _src_phone_ext_blk, oracles.phone_ext_blk),
    ("URLBlkReq", "Prohibition", ("PC", "DC"), "URL requests for listed content are denied",
     _src_url_blk_req, oracles.url_blk_req),
    ("WiFiLmt", "Prohibition", ("DC",), "Wifi cannot be turned on during restricted hours",
     _src_wifi_lmt, oracles.wifi_lmt),
    ("FileAccessLmt", "Prohibition", ("PC", "DC"), "Protected folders only open for authorized apps",
     _src_file_access_lmt, oracles.file_access_lmt),
    ("PhoneTimeLim", "Time limitation", ("PC", "DC"), "At most four hours of calls per day",
     _src_phone_time_lim, oracles.phone_time_lim),
    ("GamePlayLmt", "Time limitation", ("PC",), "At most three hours of game play per day",
     _src_game_play_lmt, oracles.game_play_lmt),
    ("OneHrPerSittingOnly", "Time limitation", ("PC",), "An hour of continuous use, then 15 minutes of rest",
     _src_one_hr_per_sitting, oracles.one_hr_per_sitting),
    ("MsgTimeLmt", "Time limitation", ("DC",), "A minute must pass between message requests",
     _src_msg_time_lmt, oracles.msg_time_lmt),
    ("MsgCntLmt", "Time and count limitation", ("PC",), "At most 500 messages per day",
     _src_msg_cnt_lmt, oracles.msg_cnt_lmt),
    ("MsgCntLmtHr", "Time and count limitation", ("PC",), "At most 100 messages in any sliding hour",
     _src_msg_cnt_lmt_hr, oracles.msg_cnt_lmt_hr),
)

CORPUS_IDS: Tuple[str, ...] = tuple(d[0] for d in _DEFS)
_BY_ID = {d[0]: d for d in _DEFS}

POLICY_DIR = Path(__file__).parent / "policies"


def build_policy_source(policy_id: str, config: SimConfig = DEFAULT_CONFIG) -> str:
    if policy_id not in _BY_ID:
        raise UnknownPolicyId(policy_id)
    return _BY_ID[policy_id][4](config)


def corpus_entry(policy_id: str, config: SimConfig = DEFAULT_CONFIG) -> CorpusEntry:
    if policy_id not in _BY_ID:
        raise UnknownPolicyId(policy_id)
    pid, category, tags, description, src, oracle = _BY_ID[policy_id]
    return CorpusEntry(
        id=pid,
        category=category,
        scenario_tags=tags,
        description=description,
        policy_source=src(config),
        oracle=oracle,
    )


def list_corpus(config: SimConfig = DEFAULT_CONFIG) -> List[CorpusEntry]:
    return [corpus_entry(pid, config) for pid in CORPUS_IDS]


def compile_corpus_policy(policy_id: str, config: SimConfig = DEFAULT_CONFIG) -> CompiledPolicy:
    source = build_policy_source(policy_id, config)
    result = validate_policy(parse_policy(source))
    if isinstance(result, list):
        details = "; ".join(e.diagnostic() for e in result)
        raise CorpusGenerationError(f"{policy_id} does not validate: {details}")
    return result


def oracle_verdicts(policy_id: str, trace: List[TraceEvent], config: SimConfig = DEFAULT_CONFIG) -> List[str]:
    if policy_id not in _BY_ID:
        raise UnknownPolicyId(policy_id)
    return _BY_ID[policy_id][5](trace, config)


def write_policy_files(directory: Path, config: SimConfig = DEFAULT_CONFIG) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    for entry in list_corpus(config):
        (directory / f"{entry.id}.dcp").write_text(entry.policy_source, encoding="utf-8")
        manifest.append(
            {
                "id": entry.id,
                "file": f"{entry.id}.dcp",
                "category": entry.category,
                "scenario_tags": list(entry.scenario_tags),
                "description": entry.description,
            }
        )
    (directory / "manifest.json").write_text(
        json.dumps({"policies": manifest, "config": config.to_dict()}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
