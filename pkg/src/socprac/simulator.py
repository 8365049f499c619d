"""Deterministic multi-agent execution of a practice.

Agents adopt the practice once its start condition holds in their view and
their role requirements are met.  Each adopted agent keeps a skeletal plan
(its steps of the plan pattern, filled with concrete actions) and on every
tick emits at most one action, chosen in priority order: an open obligation,
then an expectation raised by a strategy, then the head of its plan.  Agents
act in lexicographic order and see the effects of earlier agents in the same
tick.  Scripted ``does`` actions are queued after the plan.  Compliant agents
never emit an action an F-norm forbids; agents marked ``violator`` ignore
norms and obligations.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import product

from .actions import Achieve, Atomic, Choice, Parallel, Seq, Star, achievers, atomic_leaves
from .core import SELF, AtomicAction, Env, TraceEvent, holds, is_variable, match_args
from .errors import Diagnostic
from .monitor import Monitor
from .patterns import Step
from .tracefile import format_trace

DURATION = "duration-condition"
TICK_LIMIT = "tick-limit"
DEADLOCK = "deadlock"


@dataclass
class AgentRuntime:
    id: str
    roles: tuple
    intentions: list = field(default_factory=list)
    adopted: str | None = None
    plan: list = field(default_factory=list)  # AtomicAction templates
    violator: bool = False
    script: list = field(default_factory=list)


@dataclass
class Adoption:
    agent: str
    adopted: bool
    roles: tuple
    reason: str = ""


@dataclass
class SimulationRun:
    seed: int
    tick_limit: int
    trace: list
    violations: list
    misses: list
    pending: list
    ledger: list
    landmarks: list
    accepted: bool
    end_reason: str
    end_tick: int
    adoptions: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tick_limit": self.tick_limit,
            "end_reason": self.end_reason,
            "end_tick": self.end_tick,
            "accepted": self.accepted,
            "landmarks": [[name, idx] for name, idx in self.landmarks],
            "trace": [str(e) for e in self.trace],
            "violations": [v.to_dict() for v in self.violations],
            "expectation_misses": [m.to_dict() for m in self.misses],
            "pending_expectations": list(self.pending),
            "ledger": [e.to_dict() for e in self.ledger],
            "adoptions": [
                {"agent": a.agent, "adopted": a.adopted, "roles": list(a.roles), "reason": a.reason}
                for a in self.adoptions
            ],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def trace_text(self) -> str:
        return format_trace(self.trace)


# --------------------------------------------------------------------------
# Adoption and planning
# --------------------------------------------------------------------------


def _requirements_met(practice, scenario, agent, role) -> tuple[bool, str]:
    env = Env(frozenset(), frozenset())
    known = set(agent.beliefs) | set(scenario.public)
    for req in practice.requirements_for(role):
        for cap in req.caps:
            if cap not in agent.caps:
                return False, f"lacks cap {cap} for {role}"
        for f in req.knows:
            if not any(k.pred == f.pred and _fits(f.args, k.args, env) for k in known):
                return False, f"does not know {f}"
        for f in req.common:
            if not any(k.pred == f.pred and _fits(f.args, k.args, env) for k in scenario.public):
                return False, f"{f} is not common belief"
    return True, ""


def _fits(pattern, args, env) -> bool:
    return match_args(pattern, args, {}, env) is not None


def bind_roles(practice, scenario) -> tuple[dict, list]:
    """Role binding per agent: declared roles, or the unique role it qualifies for."""
    roles, diags = {}, []
    for agent in scenario.agents:
        if agent.plays:
            roles[agent.id] = tuple(agent.plays)
            continue
        fits = [r for r in practice.roles if _requirements_met(practice, scenario, agent, r)[0]]
        if len(fits) == 1:
            roles[agent.id] = (fits[0],)
        elif len(fits) > 1:
            roles[agent.id] = ()
            diags.append(Diagnostic("warning", f"agent {agent.id!r} qualifies for roles "
                                               f"{', '.join(fits)}; declare one with 'plays'"))
        else:
            roles[agent.id] = ()
    return roles, diags


def adopt(agent: AgentRuntime, practice, scenario, monitor: Monitor) -> Adoption:
    """Adopt when the start condition holds in the agent's view and requirements hold."""
    if not agent.roles:
        return Adoption(agent.id, False, (), "no role bound")
    decl = scenario.agent(agent.id)
    for r in agent.roles:
        ok, why = _requirements_met(practice, scenario, decl, r)
        if not ok:
            return Adoption(agent.id, False, agent.roles, why)
    env = monitor.env(monitor.agent_facts(agent.id))
    if not holds(practice.start, env, {SELF: agent.id}):
        return Adoption(agent.id, False, agent.roles, "start condition does not hold")
    return Adoption(agent.id, True, agent.roles)


def _achievable(node, practice, caps) -> bool:
    if isinstance(node, Step):
        return bool(achievers(node.formula, practice, caps))
    if isinstance(node, Choice):
        return _achievable(node.left, practice, caps) or _achievable(node.right, practice, caps)
    if isinstance(node, (Seq, Parallel)):
        return _achievable(node.left, practice, caps) and _achievable(node.right, practice, caps)
    return True


def skeletal_plan(agent: AgentRuntime, practice, scenario) -> list:
    """The agent's part of the plan pattern plus its purpose actions, as templates."""
    caps = scenario.caps
    own = {agent.id: caps[agent.id]}
    out = []

    def visit(n):
        if isinstance(n, Step):
            if n.role is None or n.role not in agent.roles:
                return
            for fill in scenario.fills:
                if set(fill.formula) == set(n.formula):
                    out.extend([fill.action] * fill.count)
            found = achievers(n.formula, practice, own)
            if found:
                out.append(_for_agent(found[0], agent))
        elif isinstance(n, Choice):
            visit(n.left if _achievable(n.left, practice, caps) else n.right)
        elif isinstance(n, (Seq, Parallel)):
            visit(n.left)
            visit(n.right)
        elif isinstance(n, Star):
            visit(n.body)

    if practice.pattern is not None:
        visit(practice.pattern)
    for p in practice.purposes:
        if p.scope is not None and p.scope not in agent.roles and p.scope != agent.id:
            continue
        for leaf in ([p.action] if isinstance(p.action, Atomic) else atomic_leaves(p.action)):
            if isinstance(leaf, Atomic) and leaf.action.symbol in caps[agent.id]:
                out.append(_for_agent(leaf.action, agent))
    return out


def _for_agent(action: AtomicAction, agent: AgentRuntime) -> AtomicAction:
    if action.args is None:
        return action
    return AtomicAction(action.symbol, tuple(
        agent.id if a == SELF or a in agent.roles else a for a in action.args))


def intentions_for(agent: AgentRuntime, practice) -> list:
    out = []
    for p in practice.purposes:
        if p.scope is not None and p.scope not in agent.roles and p.scope != agent.id:
            continue
        terms = {t for f in p.formula for t in f.args if t in practice.roles}
        if terms and not terms <= set(agent.roles):
            continue
        out.append(tuple(f.substitute({r: agent.id for r in agent.roles}) for f in p.formula))
    return out


# --------------------------------------------------------------------------
# Acting
# --------------------------------------------------------------------------


class Simulator:
    def __init__(self, practice, scenario, *, seed: int | None = None, salience_order=None):
        self.practice = practice
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        roles, self.diagnostics = bind_roles(practice, scenario)
        role_pairs = frozenset((a, r) for a, rs in roles.items() for r in rs)
        self.monitor = Monitor(practice, scenario, salience_order=salience_order, roles=role_pairs)
        self.agents = [
            AgentRuntime(a.id, roles[a.id], violator=a.violator, script=list(a.does))
            for a in sorted(scenario.agents, key=lambda a: a.id)
        ]
        self.adoptions: list = []
        self.kinds = scenario.resource_kinds(practice)

    def instances(self, template: AtomicAction, agent: AgentRuntime, binding: dict) -> list:
        """Concrete actions an agent could perform for an action template."""
        if not self.practice.has_action(template.symbol):
            return []
        decl = self.practice.action(template.symbol)
        args = template.args if template.args is not None else decl.params
        if len(args) != decl.arity:
            return []
        affords = {r.id: set(r.affords) for r in self.practice.resources}
        choices = []
        for t, p in zip(args, decl.params):
            if t in binding:
                choices.append([binding[t]])
            elif t == SELF or (t in agent.roles) or (p == SELF and (t == "_" or is_variable(t))):
                choices.append([agent.id])
            elif is_variable(t) or t == "_":
                choices.append(sorted(i for i, k in self.kinds.items()
                                      if decl.symbol in affords.get(k, ())))
            else:
                choices.append([t])
        return [AtomicAction(decl.symbol, tuple(c)) for c in product(*choices)]

    def _try(self, agent: AgentRuntime, template, binding, tick) -> TraceEvent | None:
        options = []
        for action in self.instances(template, agent, binding):
            ev = TraceEvent(tick, frozenset([agent.id]), action)
            if not self.monitor.enabled(ev):
                continue
            if not agent.violator and self.monitor.forbidden(ev):
                continue
            options.append(ev)
        if not options:
            return None
        if len(options) == 1:
            return options[0]
        return self.rng.choice(options)

    def _achieve_options(self, agent, node: Achieve, binding):
        caps = {agent.id: self.scenario.caps[agent.id]}
        return [_for_agent(a, agent) for a in achievers(node.formula, self.practice, caps)]

    def choose(self, agent: AgentRuntime, tick: int) -> tuple[TraceEvent | None, str]:
        m = self.monitor
        if not agent.violator:
            for o in m.obligations:
                if o.agent != agent.id:
                    continue
                node = self.practice.norms[o.norm].action
                for leaf in _leaves(node):
                    ev = self._try(agent, leaf, o.binding, tick)
                    if ev is not None:
                        return ev, "obligation"
        for x in m.expectations:
            if x.agent != agent.id:
                continue
            node = self.practice.strategies[x.strategy].action
            if isinstance(node, Achieve):
                continue  # honored through the plan, which may take several actions
            for leaf in _leaves(node):
                ev = self._try(agent, leaf, x.binding, tick)
                if ev is not None:
                    return ev, "strategy"
        for queue, why in ((agent.plan, "plan"), (agent.script, "script")):
            if queue:
                ev = self._try(agent, queue[0], {}, tick)
                if ev is not None:
                    queue.pop(0)
                    return ev, why
        for x in m.expectations:
            node = self.practice.strategies[x.strategy].action
            if x.agent == agent.id and isinstance(node, Achieve):
                for template in self._achieve_options(agent, node, x.binding):
                    ev = self._try(agent, template, x.binding, tick)
                    if ev is not None:
                        return ev, "strategy"
        return None, ""

    def step(self, tick: int) -> list:
        m = self.monitor
        m.begin_tick(tick)
        emitted = []
        for agent in self.agents:
            if agent.adopted is None:
                if not m.active:
                    continue
                decision = adopt(agent, self.practice, self.scenario, m)
                if not any(a.agent == agent.id and a.adopted == decision.adopted
                           and a.reason == decision.reason for a in self.adoptions):
                    self.adoptions.append(decision)
                if not decision.adopted:
                    continue
                agent.adopted = self.practice.id
                agent.plan = skeletal_plan(agent, self.practice, self.scenario)
                agent.intentions = intentions_for(agent, self.practice)
            if not m.active:
                continue
            ev, _ = self.choose(agent, tick)
            if ev is not None:
                emitted += m.observe(ev)
        return emitted

    def run(self, tick_limit: int) -> SimulationRun:
        m = self.monitor
        end_reason = TICK_LIMIT
        tick = 0
        idle_signature = None
        while tick < tick_limit:
            emitted = self.step(tick)
            if m.duration_reached():
                end_reason = DURATION
                break
            if not emitted:
                sig = m.signature()
                future_clock = any(t > tick for t in m.clock_map.values())
                if sig == idle_signature and not future_clock:
                    end_reason = DEADLOCK
                    break
                idle_signature = sig
            else:
                idle_signature = None
            tick += 1
        report = m.close()
        return SimulationRun(
            seed=self.seed,
            tick_limit=tick_limit,
            trace=report.trace,
            violations=report.violations,
            misses=report.misses,
            pending=[x.describe(self.practice) for x in report.pending],
            ledger=report.ledger,
            landmarks=report.acceptance.landmarks,
            accepted=report.acceptance.accepted,
            end_reason=end_reason,
            end_tick=tick,
            adoptions=self.adoptions,
            diagnostics=self.diagnostics,
        )


def _leaves(node) -> list:
    if isinstance(node, Atomic):
        return [node.action]
    return [x.action for x in atomic_leaves(node) if isinstance(x, Atomic)]


def run(practice, scenario, tick_limit: int = 100, *, seed: int | None = None,
        salience_order=None) -> SimulationRun:
    return Simulator(practice, scenario, seed=seed, salience_order=salience_order).run(tick_limit)


__all__ = [
    "AgentRuntime", "Adoption", "SimulationRun", "Simulator", "adopt", "bind_roles", "run",
    "skeletal_plan", "DURATION", "TICK_LIMIT", "DEADLOCK",
]
