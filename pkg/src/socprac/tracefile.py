"""Plain-text traces: one event per line, ``tick {a1,a2} action(args)``.

A leading ``~`` marks a derived (counts-as) event and ``--`` starts a comment.
A single performer may be written without braces.
"""

from __future__ import annotations

import re

from .core import AtomicAction, TraceEvent
from .dsl import Parser
from .errors import DslSyntaxError

_LINE = re.compile(r"^(~?)\s*(\d+)\s+(\{[^}]*\}|[A-Za-z_][\w]*)\s+(.+)$")


def parse_trace(text: str) -> list:
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("--", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if m is None:
            raise DslSyntaxError("malformed trace line", lineno, 1, ("tick {agents} action",))
        derived, tick, group, action_text = m.groups()
        agents = [a.strip() for a in group.strip("{}").split(",") if a.strip()]
        if not agents:
            raise DslSyntaxError("empty group", lineno, line.index("{") + 1, ("agent",))
        p = Parser(action_text)
        try:
            action = p.atomic_action()
            if p.tok.kind != "eof":
                p.error(("end of line",))
        except DslSyntaxError as e:
            col = raw.index(action_text) + e.column
            raise DslSyntaxError(e.message, lineno, col, e.expected) from None
        if action.args is None:
            action = AtomicAction(action.symbol, ())
        events.append(TraceEvent(int(tick), frozenset(agents), action, bool(derived)))
    return events


def read_trace(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())


def format_trace(events) -> str:
    return "".join(f"{e}\n" for e in events)


def write_trace(path, events) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_trace(events))
