"""Bounded search for a conforming witness trace, and the strategy-coverage scan.

Condition 1 looks for a trace that the plan pattern accepts without norm
violations, expectation misses or stranded obligations.  The search is
breadth-first over trace length; ties are broken lexicographically on
(performers, action text), so the first witness found is the shortest and,
among those, the lexicographically smallest.  Condition 2 then scans the
witness for adjacent events by different groups and asks whether some
strategy makes the handoff expected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .actions import Achieve, Atomic, achievers, atomic_leaves, effects_entail
from .core import AtomicAction, Env, TraceEvent, condition_facts, match_action, solve
from .monitor import Monitor
from .norms import resolve_group
from .patterns import accepts, compile_pattern, establishes, restrict, steps, unroll

USEFUL = "useful"
NOT_USEFUL = "not-useful"
UNKNOWN = "unknown-at-bound"


@dataclass(frozen=True)
class UncoveredPair:
    index: int  # position of the first event among the witness's brute events
    first: TraceEvent
    second: TraceEvent

    @property
    def suggestion(self) -> str:
        a = ",".join(self.first.performers)
        b = ",".join(self.second.performers)
        return f"done({a},{self.first.action}) => DO({b}, {self.second.action})"

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "from": list(self.first.performers),
            "to": list(self.second.performers),
            "first": str(self.first.action),
            "second": str(self.second.action),
            "suggestion": self.suggestion,
        }

    def __str__(self):
        return (f"{{{','.join(self.first.performers)}}} {self.first.action} -> "
                f"{{{','.join(self.second.performers)}}} {self.second.action}")


@dataclass
class UsefulnessReport:
    verdict: str
    witness: list | None  # full trace including derived events
    uncovered: list = field(default_factory=list)
    bound: int = 0
    explored: int = 0
    reason: str = ""

    @property
    def base_witness(self) -> list:
        return [e for e in self.witness or () if not e.derived]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "bound": self.bound,
            "explored": self.explored,
            "reason": self.reason,
            "condition1": {
                "witness": [str(e) for e in self.witness] if self.witness is not None else None,
                "length": len(self.base_witness) if self.witness is not None else None,
            },
            "condition2": {"uncovered": [p.to_dict() for p in self.uncovered]},
        }


# --------------------------------------------------------------------------
# Candidate events
# --------------------------------------------------------------------------


def qualified_agents(practice, scenario) -> list:
    """Agents whose capabilities meet the requirements of every role they play."""
    out = []
    for a in scenario.agents:
        ok = True
        for r in a.plays:
            for req in practice.requirements_for(r):
                if not set(req.caps) <= set(a.caps):
                    ok = False
        if ok:
            out.append(a.id)
    return out


def relevant_symbols(practice, pattern, caps) -> set:
    """Actions that can matter for a witness: pattern groundings, strategy and
    obligation actions, and whatever establishes their preconditions."""
    symbols = set()
    for s in steps(pattern):
        symbols |= {a.symbol for a in achievers(s.formula, practice, caps)}
    nodes = [st.action for st in practice.strategies]
    nodes += [n.action for n in practice.norms if n.deontic == "O"]
    for node in nodes:
        leaves = [node] if isinstance(node, (Atomic, Achieve)) else atomic_leaves(node)
        for leaf in leaves:
            if isinstance(leaf, Atomic):
                symbols.add(leaf.action.symbol)
            elif isinstance(leaf, AtomicAction):
                symbols.add(leaf.symbol)
            elif isinstance(leaf, Achieve):
                symbols |= {a.symbol for a in achievers(leaf.formula, practice, caps)}
    symbols = {s for s in symbols if practice.has_action(s)}
    todo = list(symbols)
    while todo:
        decl = practice.action(todo.pop())
        for fact, positive in condition_facts(decl.pre):
            if not positive:
                continue
            for a in achievers([fact], practice, caps):
                if a.symbol not in symbols:
                    symbols.add(a.symbol)
                    todo.append(a.symbol)
    return symbols


def candidate_events(practice, scenario, agents, symbols) -> list:
    """Ground single-agent actions, sorted by (performer, action text)."""
    kinds = scenario.resource_kinds(practice)
    affords = {r.id: set(r.affords) for r in practice.resources}
    out = []
    for agent in agents:
        caps = set(scenario.agent(agent).caps)
        for decl in practice.actions:
            if decl.symbol not in symbols or decl.symbol not in caps:
                continue
            choices = []
            for p in decl.params:
                if p == "self":
                    choices.append([agent])
                elif p[:1].isupper():
                    choices.append(sorted(i for i, k in kinds.items()
                                          if decl.symbol in affords.get(k, ())))
                else:
                    choices.append([p])
            for args in product(*choices):
                out.append(TraceEvent(0, frozenset([agent]), AtomicAction(decl.symbol, tuple(args))))
    out.sort(key=lambda e: (e.performers, str(e.action)))
    return out


# --------------------------------------------------------------------------
# Condition 1
# --------------------------------------------------------------------------


@dataclass
class _Node:
    monitor: Monitor
    dstates: frozenset
    events: tuple


def _advance(automaton, dstates: frozenset, monitor: Monitor, start: int) -> frozenset:
    step_list = sorted(automaton.steps.values(), key=lambda s: s.name)
    current = set(dstates)
    for ev in monitor.evolution[start:]:
        fired = [s.name for s in step_list if establishes(s, ev)]
        if not fired:
            continue
        nxt = set(current)
        for d in current:
            for name in fired:
                n = automaton.step(d, name)
                if n:
                    nxt.add(n)
        current = nxt
    return frozenset(current)


def _is_goal(automaton, node: _Node) -> bool:
    if not any(automaton.is_accepting(d) for d in node.dstates):
        return False
    report = node.monitor.close()
    return not report.violations and not report.misses


def search_witness(practice, scenario, bound: int, *, star_unroll: int = 2, require=(),
                   salience_order=None):
    """Returns ``(events or None, explored)``."""
    pattern = unroll(practice.pattern, star_unroll)
    if require:
        pattern = restrict(pattern, require)
    automaton = compile_pattern(pattern)
    agents = qualified_agents(practice, scenario)
    caps = {a: scenario.agent(a).caps for a in agents}
    symbols = relevant_symbols(practice, pattern, caps)
    candidates = candidate_events(practice, scenario, agents, symbols)

    root = _Node(Monitor(practice, scenario, salience_order=salience_order),
                 frozenset([automaton.initial()]), ())
    root.monitor.begin_tick(0)
    explored = 1
    if _is_goal(automaton, root):
        return [], explored
    frontier = [root]
    seen = {(root.monitor.signature(), root.dstates)}
    for depth in range(bound):
        nxt = []
        for node in frontier:
            base = node.monitor.clone()
            base.begin_tick(depth)
            if base.ever_active and not base.active:
                continue
            for cand in candidates:
                event = TraceEvent(depth, cand.group, cand.action)
                if not base.enabled(event):
                    continue
                probe = base.clone()
                start = len(probe.evolution)
                nv, nm = len(probe.violations), len(probe.misses)
                probe.observe(event)
                if len(probe.violations) > nv or len(probe.misses) > nm:
                    continue
                child = _Node(probe, _advance(automaton, node.dstates, probe, start),
                              node.events + (event,))
                explored += 1
                if _is_goal(automaton, child):
                    return list(child.monitor.trace), explored
                key = (probe.signature(), child.dstates)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append(child)
        frontier = nxt
        if not frontier:
            break
    return None, explored


# --------------------------------------------------------------------------
# Condition 2
# --------------------------------------------------------------------------


def _covers(strategy, env: Env, nxt: TraceEvent, practice) -> bool:
    for b in solve(strategy.condition, env, {}):
        group = resolve_group(strategy.group, b, env)
        if not nxt.group <= group:
            continue
        binding = dict(b)
        if len(nxt.group) == 1:
            agent = next(iter(nxt.group))
            for term in strategy.group:
                if env.is_role(term) and term not in binding and agent in env.players(term):
                    binding[term] = agent
        node = strategy.action
        leaves = [node] if isinstance(node, (Atomic, Achieve)) else atomic_leaves(node)
        for leaf in leaves:
            if isinstance(leaf, Atomic):
                leaf = leaf.action
            if isinstance(leaf, AtomicAction):
                if match_action(leaf, nxt.action, binding, env) is not None:
                    return True
            elif isinstance(leaf, Achieve):
                if not practice.has_action(nxt.action.symbol):
                    continue
                decl = practice.action(nxt.action.symbol)
                pb = decl.bind(nxt.action, nxt.group)
                if pb is None:
                    continue
                adds, _ = decl.effects(pb, nxt.group)
                goal = [f.substitute(binding) for f in leaf.formula]
                if effects_entail(goal, adds, practice.roles):
                    return True
    return False


def uncovered_pairs(practice, scenario, trace, *, salience_order=None) -> list:
    base = [e for e in trace if not e.derived]
    m = Monitor(practice, scenario, salience_order=salience_order)
    out = []
    for i, e in enumerate(base):
        m.observe(e)
        if i + 1 >= len(base):
            break
        nxt = base[i + 1]
        if nxt.group == e.group:
            continue
        probe = m.clone()
        probe.begin_tick(nxt.tick)
        env = probe.env(probe.public_facts())
        if not any(_covers(s, env, nxt, practice) for s in practice.strategies):
            out.append(UncoveredPair(i, e, nxt))
    return out


def check_useful(practice, scenario, bound: int = 12, *, star_unroll: int = 2, require=(),
                 witness=None, salience_order=None) -> UsefulnessReport:
    """Decide usefulness up to ``bound`` brute events.

    With ``witness`` given, condition 1 is checked on that trace instead of
    searched for.
    """
    if witness is not None:
        m = Monitor(practice, scenario, salience_order=salience_order)
        for e in (e for e in witness if not e.derived):
            m.observe(e)
        report = m.close()
        pattern = practice.pattern
        if require:
            pattern = restrict(unroll(pattern, star_unroll), require)
        acc = accepts(compile_pattern(pattern), m.evolution)
        trace = report.trace
        if not acc or report.violations or report.misses:
            return UsefulnessReport(NOT_USEFUL, trace, [], bound, 0,
                                    "given trace is not a conforming witness")
        pairs = uncovered_pairs(practice, scenario, trace, salience_order=salience_order)
        verdict = USEFUL if not pairs else NOT_USEFUL
        return UsefulnessReport(verdict, trace, pairs, bound, 0,
                                "uncovered cross-agent handoffs" if pairs else "")

    agents = qualified_agents(practice, scenario)
    caps = {a: scenario.agent(a).caps for a in agents}
    for s in steps(practice.pattern):
        if not achievers(s.formula, practice, caps):
            return UsefulnessReport(
                NOT_USEFUL, None, [], bound, 0,
                f"step {s.name} is unachievable by the qualified participants")
    trace, explored = search_witness(practice, scenario, bound, star_unroll=star_unroll,
                                     require=require, salience_order=salience_order)
    if trace is None:
        return UsefulnessReport(UNKNOWN, None, [], bound, explored,
                                f"no witness within bound {bound}")
    pairs = uncovered_pairs(practice, scenario, trace, salience_order=salience_order)
    verdict = USEFUL if not pairs else NOT_USEFUL
    return UsefulnessReport(verdict, trace, pairs, bound, explored,
                            "uncovered cross-agent handoffs" if pairs else "")


__all__ = [
    "USEFUL", "NOT_USEFUL", "UNKNOWN", "UncoveredPair", "UsefulnessReport",
    "candidate_events", "check_useful", "qualified_agents", "relevant_symbols",
    "search_witness", "uncovered_pairs",
]
