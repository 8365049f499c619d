"""Foundational vocabulary: facts, actions, world states, trace events and the
condition language evaluated against them.

Terms are plain strings.  Inside patterns a term is read as:

* ``_``                a wildcard,
* ``self``             the agent on whose behalf a rule is evaluated,
* ``Upper...``         a variable,
* a declared role id   a variable restricted to agents playing that role,
* anything else        a constant (agent, object or plain symbol).

Conditions are evaluated under closed-world semantics: a fact atom holds iff a
matching fact is in the view, and negation is negation as failure.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import CapabilityError, UndeclaredSymbol, UnknownAgent

Binding = Mapping[str, str]

SELF = "self"
ALL = "all"
WILDCARD = "_"


def is_variable(term: str) -> bool:
    return term[:1].isupper()


@dataclass(frozen=True, order=True)
class Fact:
    pred: str
    args: tuple[str, ...] = ()

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(self.args)})"

    def substitute(self, binding: Binding) -> "Fact":
        return Fact(self.pred, tuple(binding.get(a, a) for a in self.args))


@dataclass(frozen=True, order=True)
class AtomicAction:
    """A basic action symbol applied to arguments.

    With ``args=None`` the value is a pattern matching the symbol under any
    arguments (the bare-symbol form used in strategies such as ``DO(s, sit)``).
    """

    symbol: str
    args: tuple[str, ...] | None = ()

    def __str__(self):
        if self.args is None:
            return self.symbol
        return f"{self.symbol}({','.join(self.args)})"

    def substitute(self, binding: Binding) -> "AtomicAction":
        if self.args is None:
            return self
        return AtomicAction(self.symbol, tuple(binding.get(a, a) for a in self.args))


@dataclass(frozen=True)
class TraceEvent:
    tick: int
    group: frozenset
    action: AtomicAction
    derived: bool = False

    def __post_init__(self):
        if not self.group:
            raise ValueError("trace event needs a nonempty group")
        object.__setattr__(self, "group", frozenset(self.group))

    @property
    def performers(self) -> tuple[str, ...]:
        return tuple(sorted(self.group))

    def sort_key(self):
        return (self.tick, self.derived, self.performers, str(self.action))

    def __str__(self):
        mark = "~" if self.derived else ""
        return f"{mark}{self.tick} {{{','.join(self.performers)}}} {self.action}"


Trace = Sequence[TraceEvent]


def check_capable(event: TraceEvent, caps: Mapping[str, Iterable[str]]) -> None:
    """Enforce ``DO(a, alpha) -> Cap(a, alpha)`` for every group member.

    Derived (counts-as) events are institutional readings of a brute event and
    carry no capability requirement of their own.
    """
    if event.derived:
        return
    for agent in event.group:
        if agent not in caps:
            raise UnknownAgent(agent)
        if event.action.symbol not in caps[agent]:
            raise CapabilityError(f"{agent} lacks capability {event.action.symbol!r}")


@dataclass(frozen=True)
class WorldState:
    facts: frozenset = frozenset()
    clock: int = 0
    roles: frozenset = frozenset()  # {(agent, role)}

    def plays(self, agent: str, role: str) -> bool:
        return (agent, role) in self.roles

    def agents_playing(self, role: str) -> frozenset:
        return frozenset(a for a, r in self.roles if r == role)

    def with_facts(self, adds=(), dels=()) -> "WorldState":
        facts = (self.facts - frozenset(dels)) | frozenset(adds)
        return WorldState(facts, self.clock, self.roles)


def clock_facts(tick: int, clock_map: Mapping[str, int]) -> frozenset:
    """``time(H)`` holds once the clock has reached the tick mapped to H."""
    return frozenset(Fact("time", (h,)) for h, t in clock_map.items() if tick >= t)


def capability_of(agent: str, scenario) -> frozenset:
    try:
        return frozenset(scenario.agent(agent).caps)
    except KeyError:
        raise UnknownAgent(agent) from None


# --------------------------------------------------------------------------
# Conditions
# --------------------------------------------------------------------------


class Condition:
    __slots__ = ()


@dataclass(frozen=True)
class Truth(Condition):
    def __str__(self):
        return "true"


TRUE = Truth()


@dataclass(frozen=True)
class Falsity(Condition):
    def __str__(self):
        return "false"


FALSE = Falsity()


@dataclass(frozen=True)
class Atom(Condition):
    fact: Fact

    def __str__(self):
        return str(self.fact)


@dataclass(frozen=True)
class Play(Condition):
    agent: str
    role: str

    def __str__(self):
        return f"play({self.agent},{self.role})"


@dataclass(frozen=True)
class Done(Condition):
    """``DONE(G, alpha)``; with ``last`` only the most recent tick's events count."""

    group: tuple[str, ...]
    action: AtomicAction
    last: bool = True

    def __str__(self):
        qual = "" if self.last else "any: "
        return f"done({qual}{_group_str(self.group)},{self.action})"


@dataclass(frozen=True)
class Do(Condition):
    group: tuple[str, ...]
    action: AtomicAction

    def __str__(self):
        return f"do({_group_str(self.group)},{self.action})"


@dataclass(frozen=True)
class Cap(Condition):
    agent: str
    action: str

    def __str__(self):
        return f"cap({self.agent},{self.action})"


@dataclass(frozen=True)
class Not(Condition):
    body: Condition

    def __str__(self):
        return f"not {_wrap(self.body)}"


@dataclass(frozen=True)
class And(Condition):
    parts: tuple

    def __str__(self):
        return " & ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Or(Condition):
    parts: tuple

    def __str__(self):
        return " | ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class ForAll(Condition):
    """Universal role form: ``forall r: body`` with ``r`` bound to each player."""

    role: str
    body: Condition

    def __str__(self):
        return f"forall {self.role}: {_wrap(self.body)}"


def _group_str(group: tuple[str, ...]) -> str:
    if len(group) == 1:
        return group[0]
    return "{" + ",".join(group) + "}"


def _wrap(c: Condition) -> str:
    if isinstance(c, (And, Or, ForAll)):
        return f"({c})"
    return str(c)


def conj(*parts: Condition) -> Condition:
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif not isinstance(p, Truth):
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def conjuncts(c: Condition) -> frozenset:
    """Top-level conjuncts of ``c`` after flattening nested conjunctions."""
    if isinstance(c, And):
        out = set()
        for p in c.parts:
            out |= conjuncts(p)
        return frozenset(out)
    if isinstance(c, Truth):
        return frozenset()
    return frozenset([c])


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


@dataclass
class Vocabulary:
    """Declared identifiers; used to reject conditions naming unknown symbols."""

    roles: frozenset = frozenset()
    actions: frozenset | None = None
    agents: frozenset | None = None


@dataclass
class Env:
    facts: frozenset
    roles: frozenset  # {(agent, role)}
    caps: Mapping[str, frozenset] = field(default_factory=dict)
    trace: Sequence[TraceEvent] = ()
    upcoming: Sequence[TraceEvent] = ()
    vocab: Vocabulary = field(default_factory=Vocabulary)

    def __post_init__(self):
        self._players = _players_for(self.roles)
        self._index = _index_for(self.facts)
        self._role_names = frozenset(self.vocab.roles) | frozenset(self._players)

    def players(self, role: str) -> frozenset:
        return self._players.get(role, frozenset())

    @property
    def participants(self) -> frozenset:
        return frozenset(a for a, _ in self.roles)

    def is_role(self, term: str) -> bool:
        return term in self._role_names

    def facts_like(self, pred: str, arity: int):
        return self._index.get((pred, arity), ())

    def last_events(self) -> list:
        if not self.trace:
            return []
        last = max(e.tick for e in self.trace)
        return [e for e in self.trace if e.tick == last]


@lru_cache(maxsize=256)
def _players_for(roles: frozenset) -> dict:
    by_role = defaultdict(set)
    for agent, role in roles:
        by_role[role].add(agent)
    return {r: frozenset(a) for r, a in by_role.items()}


@lru_cache(maxsize=4096)
def _index_for(facts: frozenset) -> dict:
    index = defaultdict(list)
    for f in facts:
        index[(f.pred, len(f.args))].append(f)
    return {k: tuple(sorted(v)) for k, v in index.items()}


def bind_term(term: str, value: str, binding: dict, env: Env) -> dict | None:
    """Unify a pattern term with a ground value; returns the extended binding."""
    if term == WILDCARD:
        return binding
    if term in binding:
        return binding if binding[term] == value else None
    if term == SELF or is_variable(term):
        return {**binding, term: value}
    if env.is_role(term):
        if value in env.players(term):
            return {**binding, term: value}
        return None
    return binding if term == value else None


def match_args(pattern: Sequence[str] | None, args: Sequence[str], binding: dict, env: Env):
    if pattern is None:
        return binding
    if len(pattern) != len(args):
        return None
    for p, a in zip(pattern, args):
        binding = bind_term(p, a, binding, env)
        if binding is None:
            return None
    return binding


def match_action(pattern: AtomicAction, action: AtomicAction, binding: dict, env: Env):
    if pattern.symbol != action.symbol:
        return None
    return match_args(pattern.args, action.args, binding, env)


def match_group(group: Sequence[str], performers: frozenset, binding: dict, env: Env) -> Iterator[dict]:
    """Bindings under which the group expression denotes ``performers``."""
    if len(group) == 1:
        term = group[0]
        if term == ALL:
            if performers == env.participants:
                yield binding
            return
        if term in binding:
            if performers == frozenset([binding[term]]):
                yield binding
            return
        if env.is_role(term) and term != SELF and not is_variable(term):
            if not performers <= env.players(term):
                return
            if len(performers) == 1:
                yield {**binding, term: next(iter(performers))}
            else:
                yield binding
            return
        if term == SELF or is_variable(term) or term == WILDCARD:
            if len(performers) == 1:
                b = bind_term(term, next(iter(performers)), binding, env)
                if b is not None:
                    yield b
            return
        if performers == frozenset([term]):
            yield binding
        return
    resolved = set()
    for t in group:
        v = binding.get(t, t)
        if is_variable(v) or v == SELF or env.is_role(v):
            return
        resolved.add(v)
    if frozenset(resolved) == performers:
        yield binding


def _agents_for(term: str, binding: dict, env: Env) -> Iterator[tuple[str, dict]]:
    if term in binding:
        yield binding[term], binding
    elif env.is_role(term) and not is_variable(term) and term != SELF:
        for a in sorted(env.players(term)):
            yield a, {**binding, term: a}
    elif term == SELF or is_variable(term) or term == WILDCARD:
        for a in sorted(set(env.caps) | env.participants):
            yield a, ({**binding, term: a} if term != WILDCARD else binding)
    else:
        yield term, binding


def _check_vocab(cond: Condition, env: Env) -> None:
    vocab = env.vocab
    if isinstance(cond, Play):
        if vocab.roles and cond.role not in vocab.roles:
            raise UndeclaredSymbol("role", cond.role)
    elif isinstance(cond, (Done, Do)):
        if vocab.actions is not None and cond.action.symbol not in vocab.actions:
            raise UndeclaredSymbol("action", cond.action.symbol)
        if vocab.agents is not None:
            for t in cond.group:
                if not (t in (ALL, SELF, WILDCARD) or is_variable(t) or env.is_role(t)
                        or t in vocab.agents):
                    raise UndeclaredSymbol("agent", t)
    elif isinstance(cond, Cap):
        if vocab.actions is not None and cond.action not in vocab.actions:
            raise UndeclaredSymbol("action", cond.action)
    elif isinstance(cond, ForAll):
        if vocab.roles and cond.role not in vocab.roles:
            raise UndeclaredSymbol("role", cond.role)


def solve(cond: Condition, env: Env, binding: dict | None = None) -> Iterator[dict]:
    """Enumerate the bindings under which ``cond`` holds (deterministic order)."""
    binding = {} if binding is None else binding
    _check_vocab(cond, env)
    if isinstance(cond, Truth):
        yield binding
    elif isinstance(cond, Falsity):
        return
    elif isinstance(cond, Atom):
        f = cond.fact
        for cand in env.facts_like(f.pred, len(f.args)):
            b = match_args(f.args, cand.args, binding, env)
            if b is not None:
                yield b
    elif isinstance(cond, Play):
        for agent, b in _agents_for(cond.agent, binding, env):
            if agent in env.players(cond.role):
                yield b
    elif isinstance(cond, Cap):
        for agent, b in _agents_for(cond.agent, binding, env):
            if cond.action in env.caps.get(agent, ()):
                yield b
    elif isinstance(cond, (Done, Do)):
        if isinstance(cond, Do):
            events = env.upcoming
        else:
            events = env.last_events() if cond.last else env.trace
        seen = []
        for e in events:
            for b in match_group(cond.group, e.group, binding, env):
                b2 = match_action(cond.action, e.action, b, env)
                if b2 is not None and b2 not in seen:
                    seen.append(b2)
                    yield b2
    elif isinstance(cond, Not):
        if next(solve(cond.body, env, binding), None) is None:
            yield binding
    elif isinstance(cond, And):
        yield from _solve_all(cond.parts, env, binding)
    elif isinstance(cond, Or):
        seen = []
        for p in cond.parts:
            for b in solve(p, env, binding):
                if b not in seen:
                    seen.append(b)
                    yield b
    elif isinstance(cond, ForAll):
        if all(
            next(solve(cond.body, env, {**binding, cond.role: a}), None) is not None
            for a in sorted(env.players(cond.role))
        ):
            yield binding
    else:
        raise TypeError(f"not a condition: {cond!r}")


def _solve_all(parts, env, binding):
    if not parts:
        yield binding
        return
    for b in solve(parts[0], env, binding):
        yield from _solve_all(parts[1:], env, b)


def holds(cond: Condition, env: Env, binding: dict | None = None) -> bool:
    return next(solve(cond, env, binding), None) is not None


def make_env(
    state: WorldState,
    trace: Trace = (),
    *,
    caps: Mapping[str, frozenset] | None = None,
    view: Iterable[Fact] = (),
    upcoming: Trace = (),
    vocab: Vocabulary | None = None,
) -> Env:
    return Env(
        facts=state.facts | frozenset(view),
        roles=state.roles,
        caps=caps or {},
        trace=trace,
        upcoming=upcoming,
        vocab=vocab or Vocabulary(),
    )


def eval_condition(
    cond: Condition,
    state: WorldState,
    trace: Trace = (),
    *,
    caps: Mapping[str, frozenset] | None = None,
    view: Iterable[Fact] = (),
    binding: dict | None = None,
    upcoming: Trace = (),
    vocab: Vocabulary | None = None,
) -> bool:
    """Truth of ``cond`` against ``state`` (plus extra believed ``view`` facts)."""
    env = make_env(state, trace, caps=caps, view=view, upcoming=upcoming, vocab=vocab)
    return holds(cond, env, dict(binding or {}))


def condition_facts(cond: Condition) -> Iterator[tuple[Fact, bool]]:
    """Fact atoms in ``cond`` with their polarity (False under a negation)."""

    def walk(c, positive):
        if isinstance(c, Atom):
            yield c.fact, positive
        elif isinstance(c, Not):
            yield from walk(c.body, not positive)
        elif isinstance(c, (And, Or)):
            for p in c.parts:
                yield from walk(p, positive)
        elif isinstance(c, ForAll):
            yield from walk(c.body, positive)

    yield from walk(cond, True)


def condition_actions(cond: Condition) -> Iterator[AtomicAction]:
    if isinstance(cond, (Done, Do)):
        yield cond.action
    elif isinstance(cond, Not):
        yield from condition_actions(cond.body)
    elif isinstance(cond, (And, Or)):
        for p in cond.parts:
            yield from condition_actions(p)
    elif isinstance(cond, ForAll):
        yield from condition_actions(cond.body)
