"""Practice and scenario data model.

A :class:`SocialPractice` carries the sixteen arguments of the practice operator
(id, roles, actors, resources, affordances, places, purpose, promotes,
counts-as, plan pattern, norms, strategies, start condition, duration,
possible actions, requirements).  Actors come from a :class:`Scenario`; see
:meth:`SocialPractice.bind`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .core import (
    FALSE, TRUE, AtomicAction, Condition, SELF, WILDCARD, Vocabulary, is_variable,
)


@dataclass(frozen=True)
class ActionDecl:
    """A possible action: signature, optional precondition and effect atoms.

    Signature parameters are ``self`` (the performer), constants, or upper-case
    variables ranging over resource instances.
    """

    symbol: str
    params: tuple = ()
    pre: Condition = TRUE
    adds: tuple = ()
    dels: tuple = ()

    @property
    def shape(self) -> AtomicAction:
        return AtomicAction(self.symbol, self.params)

    @property
    def arity(self) -> int:
        return len(self.params)

    def bind(self, action: AtomicAction, performers: frozenset) -> dict | None:
        """Parameter binding for a ground action, or None if it does not fit."""
        if action.symbol != self.symbol or action.args is None or len(action.args) != self.arity:
            return None
        b = {}
        if len(performers) == 1:
            b[SELF] = next(iter(performers))
        for p, a in zip(self.params, action.args):
            if p == SELF or is_variable(p):
                if b.get(p, a) != a:
                    return None
                b[p] = a
            elif p != a:
                return None
        return b

    def effects(self, binding: Mapping[str, str], performers: frozenset) -> tuple[set, set]:
        adds, dels = set(), set()
        for target, src in ((adds, self.adds), (dels, self.dels)):
            for f in src:
                if SELF in f.args and SELF not in binding:
                    for p in sorted(performers):
                        target.add(f.substitute({**binding, SELF: p}))
                else:
                    target.add(f.substitute(binding))
        return adds, dels


@dataclass(frozen=True)
class ResourceDecl:
    id: str
    affords: tuple = ()


@dataclass(frozen=True)
class PurposeDecl:
    """``purpose(scope, gamma, context) = phi``.

    ``scope`` is None for the action-generic form, otherwise a role or agent id.
    """

    action: object
    formula: tuple
    scope: str | None = None
    context: str = ""


@dataclass(frozen=True)
class PromotesRule:
    role: str | None
    action: AtomicAction
    value: str
    polarity: str  # "+" promotes, "-" demotes


@dataclass(frozen=True)
class CountsAsRule:
    source: AtomicAction
    target: AtomicAction
    context: str = ""

    def __str__(self):
        return f"{self.source} => {self.target}"


@dataclass(frozen=True)
class Norm:
    deontic: str  # "O" or "F"
    role: str
    condition: Condition
    action: object
    sanction: str | None = None

    def __str__(self):
        return f"{self.deontic}({self.role}, {self.condition}, {self.action})"


@dataclass(frozen=True)
class Strategy:
    condition: Condition
    group: tuple
    action: object

    def __str__(self):
        g = self.group[0] if len(self.group) == 1 else "{" + ",".join(self.group) + "}"
        return f"{self.condition} => DO({g}, {self.action})"


@dataclass(frozen=True)
class Requirement:
    role: str  # or "all"
    caps: tuple = ()
    knows: tuple = ()
    common: tuple = ()


@dataclass(frozen=True)
class ContextDecl:
    id: str
    when: Condition = TRUE


@dataclass(frozen=True)
class SocialPractice:
    id: str
    roles: tuple = ()
    actors: tuple = ()  # ((agent, (role, ...)), ...) once bound to a scenario
    resources: tuple = ()
    places: tuple = ()
    purposes: tuple = ()
    promotes: tuple = ()
    counts_as: tuple = ()
    pattern: object = None
    norms: tuple = ()
    strategies: tuple = ()
    start: Condition = TRUE
    duration: Condition = FALSE
    actions: tuple = ()
    requirements: tuple = ()
    contexts: tuple = ()
    when: Condition = TRUE

    @property
    def affordances(self) -> tuple:
        return tuple((r.id, a) for r in self.resources for a in r.affords)

    def action(self, symbol: str) -> ActionDecl:
        for a in self.actions:
            if a.symbol == symbol:
                return a
        raise KeyError(symbol)

    def has_action(self, symbol: str) -> bool:
        return any(a.symbol == symbol for a in self.actions)

    def requirements_for(self, role: str) -> list:
        return [r for r in self.requirements if r.role in (role, "all")]

    def vocab(self, agents=None) -> Vocabulary:
        return Vocabulary(
            roles=frozenset(self.roles),
            actions=frozenset(a.symbol for a in self.actions),
            agents=None if agents is None else frozenset(agents),
        )

    def bind(self, scenario: "Scenario") -> "SocialPractice":
        actors = tuple((a.id, tuple(a.plays)) for a in scenario.agents)
        return replace(self, actors=actors)

    def fields16(self) -> dict:
        return {
            "sp": self.id,
            "R": self.roles,
            "A": self.actors,
            "O": self.resources,
            "Af": self.affordances,
            "Pl": self.places,
            "P": self.purposes,
            "Pv": self.promotes,
            "Co": self.counts_as,
            "PP": self.pattern,
            "N": self.norms,
            "S": self.strategies,
            "Sc": self.start,
            "D": self.duration,
            "Ac": self.actions,
            "Re": self.requirements,
        }


@dataclass(frozen=True)
class Fill:
    """Scenario instantiation rule: before achieving ``formula`` repeat ``action``."""

    formula: tuple
    action: AtomicAction
    count: int


@dataclass(frozen=True)
class AgentDecl:
    id: str
    plays: tuple = ()
    caps: tuple = ()
    beliefs: tuple = ()
    violator: bool = False
    does: tuple = ()


@dataclass(frozen=True)
class Scenario:
    id: str
    practice: str
    agents: tuple = ()
    resources: tuple = ()  # ((instance, kind), ...)
    facts: tuple = ()
    public: tuple = ()
    clock: tuple = ()  # ((hour, tick), ...)
    seed: int = 0
    fills: tuple = ()

    def agent(self, agent_id: str) -> AgentDecl:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)

    @property
    def agent_ids(self) -> tuple:
        return tuple(a.id for a in self.agents)

    @property
    def caps(self) -> dict:
        return {a.id: frozenset(a.caps) for a in self.agents}

    @property
    def clock_map(self) -> dict:
        return dict(self.clock)

    def resource_kinds(self, practice: SocialPractice) -> dict:
        """Instance id -> declared resource id (practice resources by default)."""
        if self.resources:
            return dict(self.resources)
        return {r.id: r.id for r in practice.resources}


def is_pattern_term(t: str, roles) -> bool:
    return t in (SELF, WILDCARD) or is_variable(t) or t in roles


def without_strategy(practice: SocialPractice, index: int) -> SocialPractice:
    s = list(practice.strategies)
    del s[index]
    return replace(practice, strategies=tuple(s))


__all__ = [
    "ActionDecl", "AgentDecl", "ContextDecl", "CountsAsRule", "Fill", "Norm",
    "PromotesRule", "PurposeDecl", "Requirement", "ResourceDecl", "Scenario",
    "SocialPractice", "Strategy", "without_strategy",
]
