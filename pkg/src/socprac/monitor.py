"""The incremental execution monitor shared by search, simulation and trace checking.

Per tick the monitor first re-evaluates conditions (practice activation,
strategy triggers, obligation windows), then takes the tick's events one at a
time: counts-as expansion, F-norm checks against the state at the start of the
tick, effect application, obligation discharge and expectation bookkeeping.

Interpretations fixed here:

* an obligation opens when its condition becomes true for the subject; it is
  already met if the subject's last own action before the triggering tick
  matches the obliged action, and it is unmet if still open when the
  condition ceases, the practice ends or the trace ends;
* a strategy fires when its condition becomes true (per binding) over the
  world plus the public belief tier; a ``true`` condition fires when the
  practice becomes active;
* each member of the strategy group must make the expected action its next
  own (non-derived) action; an ``@(phi)`` expectation tolerates intermediate
  own actions until one of them establishes ``phi``;
* expectations still open at the end are *pending*, not misses.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .actions import Achieve, Atomic, atomic_leaves
from .beliefs import BeliefStore, attribute_goals
from .contexts import Ambiguous, Context, is_active, most_salient, registry_for
from .core import (
    Atom, Env, Not, TraceEvent, WorldState, check_capable, clock_facts, conj, holds,
    match_action, solve,
)
from .norms import (
    ExpectationMiss, LedgerEntry, Violation, afford_check, countsas_expand, resolve_group,
)
from .patterns import Acceptance, Evolution, accepts, compile_pattern


def _freeze(binding: dict) -> tuple:
    return tuple(sorted(binding.items()))


@dataclass
class Obligation:
    norm: int
    agent: str
    key: tuple
    opened: int
    binding: dict

    def describe(self, practice) -> str:
        return f"O({self.agent}, {_node_str(practice.norms[self.norm].action, self.binding)})"


@dataclass
class Expectation:
    strategy: int
    agent: str
    opened: int
    binding: dict

    def describe(self, practice) -> str:
        return f"DO({self.agent}, {_node_str(practice.strategies[self.strategy].action, self.binding)})"


def _node_str(node, binding) -> str:
    if isinstance(node, Atomic):
        return str(node.action.substitute(binding))
    if isinstance(node, Achieve):
        facts = sorted(f.substitute(binding) for f in node.formula)
        return "@(" + " & ".join(str(f) for f in facts) + ")" if facts else "@true"
    return str(node)


@dataclass
class MonitorReport:
    trace: list
    violations: list
    misses: list
    pending: list
    ledger: list
    acceptance: Acceptance
    open_obligations: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations and not self.misses


class Monitor:
    def __init__(self, practice, scenario, *, salience_order=None, check_affordances=True,
                 roles=None):
        self.practice = practice
        self.scenario = scenario
        self.caps = scenario.caps
        self.kinds = scenario.resource_kinds(practice)
        self.clock_map = scenario.clock_map
        self.salience_order = salience_order
        self.check_affordances = check_affordances
        self.agents = scenario.agent_ids
        if roles is None:
            roles = frozenset((a.id, r) for a in scenario.agents for r in a.plays)
        facts = frozenset(scenario.facts) | clock_facts(0, self.clock_map)
        self.state = WorldState(facts, 0, roles)
        self.beliefs = BeliefStore(self.agents)
        for a in scenario.agents:
            for f in a.beliefs:
                self.beliefs.tell(a.id, f)
        for f in scenario.public:
            self.beliefs.publish(self.agents, f)
        self.vocab = practice.vocab(self.agents)
        self.registry = registry_for(practice)
        self.activation = conj(practice.start, Not(practice.duration), practice.when)
        self.trace: list = []
        self.evolution: list = []
        self.violations: list = []
        self.misses: list = []
        self.pending: list = []
        self.ledger: list = []
        self.obligations: list = []
        self.expectations: list = []
        self.active = False
        self.ever_active = False
        self.tick = -1
        self._tick_facts = self.state.facts
        self._strategy_prev: frozenset = frozenset()
        self._norm_prev: frozenset = frozenset()
        self._own_before: dict = {}

    # ------------------------------------------------------------- helpers

    def clone(self) -> "Monitor":
        m = copy.copy(self)
        for name in ("trace", "evolution", "violations", "misses", "pending", "ledger"):
            setattr(m, name, list(getattr(self, name)))
        m.obligations = [copy.copy(o) for o in self.obligations]
        m.expectations = [copy.copy(e) for e in self.expectations]
        m._own_before = dict(self._own_before)
        return m

    def env(self, facts=None, upcoming=()) -> Env:
        return Env(self.state.facts if facts is None else facts, self.state.roles, self.caps,
                   self.trace, upcoming, self.vocab)

    def public_facts(self) -> frozenset:
        return self.state.facts | self.beliefs.public_view(self.agents)

    def agent_facts(self, agent: str, base=None) -> frozenset:
        return (self.state.facts if base is None else base) | self.beliefs.view(agent)

    def plays(self, agent: str, role: str) -> bool:
        return self.state.plays(agent, role)

    def signature(self) -> tuple:
        last = max((e.tick for e in self.trace), default=-1)
        return (
            self.state.facts,
            self.active,
            self.ever_active,
            frozenset(e for e in self.trace if e.tick == last and last == self.tick),
            frozenset((o.norm, o.agent, o.key) for o in self.obligations),
            frozenset((x.strategy, x.agent, _freeze(x.binding)) for x in self.expectations),
            self._strategy_prev,
            self._norm_prev,
            len(self.violations),
            len(self.misses),
        )

    # ------------------------------------------------------------ per tick

    def begin_tick(self, tick: int) -> None:
        if tick < self.tick:
            raise ValueError(f"tick {tick} precedes current tick {self.tick}")
        if tick == self.tick:
            return
        self.tick = tick
        clock = frozenset(f for f in self.state.facts if f.pred != "time")
        self.state = WorldState(clock | clock_facts(tick, self.clock_map), tick, self.state.roles)
        self._evaluate()
        self._tick_facts = self.state.facts

    def _evaluate(self) -> None:
        now = holds(self.activation, self.env(self.public_facts()))
        if now and not self.active:
            self.active = True
            self.ever_active = True
            self._strategy_prev = frozenset()
            self._norm_prev = frozenset()
        elif not now and self.active:
            self._deactivate()
        if self.active:
            self._update_strategies()
            self._update_obligations()

    def duration_reached(self) -> bool:
        """Has the practice run and does its end condition hold right now?"""
        return self.ever_active and holds(self.practice.duration, self.env(self.public_facts()))

    def _deactivate(self) -> None:
        self.active = False
        for o in self.obligations:
            self.violations.append(Violation(
                self.tick, o.agent, o.norm, "obligation-unmet",
                f"{o.describe(self.practice)} open at practice end"))
        self.obligations = []
        self.pending.extend(self.expectations)
        self.expectations = []

    def _update_strategies(self) -> None:
        env = self.env(self.public_facts())
        keys = set()
        fresh = []
        for i, s in enumerate(self.practice.strategies):
            seen = set()
            for b in solve(s.condition, env, {}):
                key = (i, _freeze(b))
                if key in seen:
                    continue
                seen.add(key)
                keys.add(key)
                if key not in self._strategy_prev:
                    fresh.append((i, b))
        self._strategy_prev = frozenset(keys)
        for i, b in fresh:
            s = self.practice.strategies[i]
            for agent in sorted(resolve_group(s.group, b, env)):
                if agent not in self.agents:
                    continue
                binding = dict(b)
                for term in s.group:
                    if env.is_role(term) and term not in binding and agent in env.players(term):
                        binding[term] = agent
                self.expectations.append(Expectation(i, agent, self.tick, binding))

    def _update_obligations(self) -> None:
        keys = set()
        for i, n in enumerate(self.practice.norms):
            if n.deontic != "O":
                continue
            for agent in sorted(self.state.agents_playing(n.role)):
                env = self.env(self.agent_facts(agent))
                for b in solve(n.condition, env, {n.role: agent}):
                    keys.add((i, agent, _freeze(b)))
        for key in sorted(self._norm_prev - keys):
            for o in list(self.obligations):
                if (o.norm, o.agent, o.key) == key:
                    self.obligations.remove(o)
                    self.violations.append(Violation(
                        self.tick, o.agent, o.norm, "obligation-unmet",
                        f"{o.describe(self.practice)} open when its condition ceased"))
        for key in sorted(keys - self._norm_prev):
            i, agent, frozen = key
            binding = dict(frozen)
            prior = self._last_own_before(agent)
            if prior is not None and self._matches(self.practice.norms[i].action, prior, binding):
                continue
            self.obligations.append(Obligation(i, agent, frozen, self.tick, binding))
        self._norm_prev = frozenset(keys)

    def _last_own_before(self, agent: str):
        """The agent's last brute event before the most recent tick, with its expansions."""
        last = max((e.tick for e in self.trace), default=None)
        brute = None
        for e in reversed(self.trace):
            if e.tick < last and agent in e.group and not e.derived:
                brute = e
                break
        if brute is None:
            return None
        return [brute] + [d for d in self.trace
                          if d.tick == brute.tick and d.derived and d.group == brute.group]

    # --------------------------------------------------------------- events

    def _matches(self, node, events, binding: dict) -> bool:
        """Does one of ``events`` (a brute event and its expansions) perform ``node``?"""
        env = self.env()
        for e in events:
            if isinstance(node, Achieve):
                if node.formula and self._establishes(node.formula, e, binding):
                    return True
                if not node.formula:
                    return True
                continue
            for leaf in atomic_leaves(node) if not isinstance(node, Atomic) else [node.action]:
                if isinstance(leaf, Atomic):
                    leaf = leaf.action
                if isinstance(leaf, Achieve):
                    if self._establishes(leaf.formula, e, binding):
                        return True
                    continue
                if match_action(leaf, e.action, binding, env) is not None:
                    return True
        return False

    def _establishes(self, formula, event, binding) -> bool:
        idx = self._event_index(event)
        if idx is None:
            return False
        ev = self.evolution[idx]
        goal = [f.substitute(binding) for f in formula]
        if not any(any(g.pred == a.pred and len(g.args) == len(a.args) for a in ev.added)
                   for g in goal):
            return False
        return holds(conj(*[Atom(f) for f in goal]), ev.env, dict(binding))

    def _event_index(self, event):
        for i in range(len(self.trace) - 1, -1, -1):
            if self.trace[i] is event:
                return i
        return None

    def enabled(self, event: TraceEvent) -> bool:
        """Cap, affordance and precondition check for a candidate brute event."""
        for a in event.group:
            if event.action.symbol not in self.caps.get(a, ()):
                return False
        if self.check_affordances and not afford_check(event.action, self.practice, self.kinds):
            return False
        if not self.practice.has_action(event.action.symbol):
            return False
        decl = self.practice.action(event.action.symbol)
        b = decl.bind(event.action, event.group)
        if b is None:
            return False
        for p, v in zip(decl.params, event.action.args):
            if p[:1].isupper() and v not in self.kinds:
                return False
        return holds(decl.pre, self.env(), b)

    def forbidden(self, event: TraceEvent) -> bool:
        """Would ``event`` (with its expansions) violate an F-norm right now?"""
        probe = self.clone()
        before = len(probe.violations)
        probe.observe(event)
        return any(v.kind == "forbidden-done" for v in probe.violations[before:])

    def observe(self, event: TraceEvent) -> list:
        """Feed one brute event; returns it with its counts-as expansions."""
        if event.derived:
            raise ValueError("derived events are produced by the monitor, not fed to it")
        self.begin_tick(event.tick)
        check_capable(event, self.caps)
        if self.active:
            expanded = countsas_expand(event, self.practice, self.env(), self._rule_applies)
        else:
            expanded = [event]
        for e in expanded:
            self._apply(e)
        if self.active:
            self._after_event(expanded)
        return expanded

    def _rule_applies(self, rule, event) -> bool:
        if not rule.context or rule.context == self.practice.id:
            return True
        for c in self.registry:
            if c.id == rule.context:
                return all(is_active(c, a, None, self.env()) for a in event.group)
        return False

    def _apply(self, e: TraceEvent) -> None:
        if self.active:
            self._check_forbidden(e)
        adds, dels = set(), set()
        if self.practice.has_action(e.action.symbol):
            decl = self.practice.action(e.action.symbol)
            b = decl.bind(e.action, e.group)
            if b is not None:
                adds, dels = decl.effects(b, e.group)
        self.state = self.state.with_facts(adds, dels)
        self.trace.append(e)
        self.evolution.append(Evolution(e, frozenset(adds), self.env()))
        env = self.env()
        for agent in sorted(e.group):
            for i, rule in enumerate(self.practice.promotes):
                if rule.role is not None and agent not in env.players(rule.role):
                    continue
                b = {rule.role: agent} if rule.role else {}
                if match_action(rule.action, e.action, b, env) is not None:
                    self.ledger.append(LedgerEntry(e.tick, agent, rule.value, rule.polarity, i))

    def _check_forbidden(self, e: TraceEvent) -> None:
        past = [x for x in self.trace if x.tick < e.tick]
        for i, n in enumerate(self.practice.norms):
            if n.deontic != "F":
                continue
            for agent in sorted(e.group):
                if not self.plays(agent, n.role):
                    continue
                env = Env(self.agent_facts(agent, self._tick_facts), self.state.roles, self.caps,
                          past, (), self.vocab)
                for b in solve(n.condition, env, {n.role: agent}):
                    if self._action_fits(n.action, e, b, env):
                        self.violations.append(Violation(
                            e.tick, agent, i, "forbidden-done",
                            f"{e.action} while {n.condition}"))
                        break

    def _action_fits(self, node, e, binding, env) -> bool:
        leaves = [node.action] if isinstance(node, Atomic) else [
            x.action if isinstance(x, Atomic) else x for x in atomic_leaves(node)]
        for leaf in leaves:
            if hasattr(leaf, "symbol") and match_action(leaf, e.action, binding, env) is not None:
                return True
        return False

    def _after_event(self, expanded: list) -> None:
        brute = expanded[0]
        for o in list(self.obligations):
            if o.agent in brute.group and self._matches(
                    self.practice.norms[o.norm].action, expanded, o.binding):
                self.obligations.remove(o)
        for x in list(self.expectations):
            if x.agent not in brute.group:
                continue
            node = self.practice.strategies[x.strategy].action
            if self._matches(node, expanded, x.binding):
                self.expectations.remove(x)
            elif isinstance(node, Achieve):
                continue
            else:
                self.expectations.remove(x)
                self.misses.append(ExpectationMiss(
                    brute.tick, x.agent, x.strategy, x.describe(self.practice), str(brute.action)))

    # --------------------------------------------------------------- finish

    def close(self) -> MonitorReport:
        """Settle obligations and expectations at the end of the trace."""
        end = self.clone()
        end.tick = max(end.tick, 0)
        end._evaluate()
        if end.active:
            for o in end.obligations:
                end.violations.append(Violation(
                    end.tick, o.agent, o.norm, "obligation-unmet",
                    f"{o.describe(end.practice)} open at trace end"))
            end.pending.extend(end.expectations)
        return MonitorReport(
            trace=list(end.trace),
            violations=end.violations,
            misses=end.misses,
            pending=end.pending,
            ledger=end.ledger,
            acceptance=self.acceptance(),
            open_obligations=[o.describe(end.practice) for o in end.obligations],
        )

    def acceptance(self, automaton=None) -> Acceptance:
        if self.practice.pattern is None:
            return Acceptance(False, [])
        automaton = automaton or compile_pattern(self.practice.pattern)
        return accepts(automaton, self.evolution)

    # ------------------------------------------------------------- queries

    def salient(self, agent: str):
        return most_salient(agent, None, self.env(self.agent_facts(agent)), self.registry,
                            self.salience_order)

    def salient_id(self, agent: str):
        s = self.salient(agent)
        return s.id if isinstance(s, Context) else None

    def goals(self) -> list:
        out = []
        for i, e in enumerate(self.trace):
            env = self.evolution[i].env
            out += attribute_goals(e, i, self.practice, env, self.salient_id)
        return out


def check_trace(practice, scenario, events, *, salience_order=None) -> MonitorReport:
    """Monitor a whole trace of brute events (derived events in it are ignored)."""
    m = Monitor(practice, scenario, salience_order=salience_order)
    for e in sorted((e for e in events if not e.derived), key=lambda e: e.tick):
        m.observe(e)
    return m.close()


__all__ = [
    "Ambiguous", "Expectation", "Monitor", "MonitorReport", "Obligation", "check_trace",
]
