"""Counts-as expansion, affordances, the value ledger and violation records."""

from __future__ import annotations

from dataclasses import dataclass

from .core import AtomicAction, Env, TraceEvent, match_action


@dataclass(frozen=True)
class Violation:
    tick: int
    agent: str
    norm: int  # index into practice.norms
    kind: str  # "forbidden-done" or "obligation-unmet"
    evidence: str

    def to_dict(self) -> dict:
        return {"tick": self.tick, "agent": self.agent, "norm": self.norm,
                "kind": self.kind, "evidence": self.evidence}

    def __str__(self):
        return f"{self.tick} {self.agent} {self.kind} norm#{self.norm}: {self.evidence}"


@dataclass(frozen=True)
class ExpectationMiss:
    tick: int
    agent: str
    strategy: int
    expected: str
    actual: str

    def to_dict(self) -> dict:
        return {"tick": self.tick, "agent": self.agent, "strategy": self.strategy,
                "expected": self.expected, "actual": self.actual}

    def __str__(self):
        return (f"{self.tick} {self.agent} strategy#{self.strategy}: expected {self.expected}, "
                f"did {self.actual}")


@dataclass(frozen=True)
class LedgerEntry:
    tick: int
    agent: str
    value: str
    polarity: str
    rule: int

    def to_dict(self) -> dict:
        return {"tick": self.tick, "agent": self.agent, "value": self.value,
                "polarity": self.polarity, "rule": self.rule}

    def __str__(self):
        return f"{self.tick} {self.agent} {self.polarity}{self.value} (rule#{self.rule})"


def countsas_expand(event: TraceEvent, practice, env: Env, applies=None) -> list:
    """``event`` followed by every event it counts as, transitively.

    ``applies(rule)`` decides whether a rule's context is in force (default:
    always).  Derived events share the tick and group of their source.
    """
    out = [event]
    seen = {(event.action, event.derived)}
    queue = [event]
    while queue:
        e = queue.pop(0)
        for rule in practice.counts_as:
            if applies is not None and not applies(rule, e):
                continue
            b = match_action(rule.source, e.action, {}, env)
            if b is None:
                continue
            target = rule.target.substitute(b)
            if target.args is None:
                target = AtomicAction(target.symbol, ())
            d = TraceEvent(e.tick, e.group, target, True)
            if (d.action, True) not in seen:
                seen.add((d.action, True))
                out.append(d)
                queue.append(d)
    return out


def afford_check(action: AtomicAction, practice, resource_kinds: dict) -> bool:
    """Every resource argument must afford the action's symbol."""
    affords = {r.id: set(r.affords) for r in practice.resources}
    for arg in action.args or ():
        kind = resource_kinds.get(arg)
        if kind is None:
            continue
        if action.symbol not in affords.get(kind, ()):
            return False
    return True


def value_ledger(trace, practice, env: Env) -> list:
    """One entry per (event, performer, matching promotes rule), in trace order."""
    out = []
    for e in trace:
        for agent in sorted(e.group):
            for i, rule in enumerate(practice.promotes):
                if rule.role is not None and agent not in env.players(rule.role):
                    continue
                b = {rule.role: agent} if rule.role else {}
                if match_action(rule.action, e.action, b, env) is None:
                    continue
                out.append(LedgerEntry(e.tick, agent, rule.value, rule.polarity, i))
    return out


def resolve_group(group, binding: dict, env: Env) -> frozenset:
    """Agents denoted by a strategy group expression under ``binding``."""
    out = set()
    for term in group:
        if term == "all":
            out |= env.participants
        elif term in binding:
            out.add(binding[term])
        elif env.is_role(term):
            out |= env.players(term)
        else:
            out.add(term)
    return frozenset(out)

