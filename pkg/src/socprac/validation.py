"""Static checks over parsed practices and scenarios.

Every check yields a :class:`Diagnostic`; errors make ``parse_*`` raise, while
warnings (for example unmet role requirements) are reported and tolerated.
"""

from __future__ import annotations

from .actions import Atomic, walk
from .core import (
    ALL, SELF, And, Atom, Cap, Do, Done, Env, Fact, ForAll, Not, Or, Play,
    clock_facts, condition_actions, holds, is_variable, match_args,
)
from .dsl import parse_practice_syntax, parse_scenario_syntax
from .errors import Diagnostic, ValidationError
from .model import Scenario, SocialPractice
from .patterns import Step, pattern_nodes


def _diag(severity, message, positions, *keys):
    for k in keys:
        if k in positions:
            line, col = positions[k]
            return Diagnostic(severity, message, line, col)
    return Diagnostic(severity, message)


def _conditions(sp: SocialPractice):
    yield sp.start
    yield sp.duration
    yield sp.when
    for n in sp.norms:
        yield n.condition
    for s in sp.strategies:
        yield s.condition
    for a in sp.actions:
        yield a.pre
    for c in sp.contexts:
        yield c.when


def _subconditions(c):
    yield c
    if isinstance(c, (And, Or)):
        for p in c.parts:
            yield from _subconditions(p)
    elif isinstance(c, (Not, ForAll)):
        yield from _subconditions(c.body)


def _expr_actions(expr):
    for node in walk(expr):
        if isinstance(node, Atomic):
            yield node.action


def action_uses(sp: SocialPractice):
    """Every (atomic action pattern, where) referenced by the practice."""
    for rule in sp.counts_as:
        yield rule.source, "counts_as"
        yield rule.target, "counts_as"
    for n in sp.norms:
        for a in _expr_actions(n.action):
            yield a, "norm"
    for s in sp.strategies:
        for a in _expr_actions(s.action):
            yield a, "strategy"
    for p in sp.purposes:
        for a in _expr_actions(p.action):
            yield a, "purpose"
    for p in sp.promotes:
        yield p.action, "promotes"
    for c in _conditions(sp):
        for a in condition_actions(c):
            yield a, "condition"


def _counts_as_cycle(sp: SocialPractice) -> list | None:
    edges: dict = {}
    for rule in sp.counts_as:
        edges.setdefault(rule.source.symbol, set()).add(rule.target.symbol)
    state: dict = {}

    def visit(n, path):
        state[n] = 1
        for m in sorted(edges.get(n, ())):
            if state.get(m) == 1:
                return path + [n, m]
            if m not in state:
                found = visit(m, path + [n])
                if found:
                    return found
        state[n] = 2
        return None

    for n in sorted(edges):
        if n not in state:
            found = visit(n, [])
            if found:
                return found
    return None


def _clock_only(c) -> bool:
    for sub in _subconditions(c):
        if isinstance(sub, Atom) and sub.fact.pred != "time":
            return False
        if isinstance(sub, (Play, Cap, Done, Do)):
            return False
    return True


def _hours(c) -> list:
    hours = set()
    for sub in _subconditions(c):
        if isinstance(sub, Atom) and sub.fact.pred == "time" and len(sub.fact.args) == 1:
            hours.add(sub.fact.args[0])
    return sorted(hours, key=lambda h: (not h.isdigit(), int(h) if h.isdigit() else 0, h))


def _always_true(start, duration) -> bool:
    """Sc & D holds at every clock stage (checked on clock atoms only)."""
    if not (_clock_only(start) and _clock_only(duration)):
        return False
    both = And((start, duration))
    hours = _hours(both)
    stages = [{}] + [{h: 0 for h in hours[: i + 1]} for i in range(len(hours))]
    for stage in stages:
        env = Env(clock_facts(0, stage), frozenset())
        if not holds(both, env):
            return False
    return True


def validate_practice(sp: SocialPractice, positions: dict | None = None) -> list:
    positions = positions or {}
    out = []
    roles = set(sp.roles)
    decls = {}
    for a in sp.actions:
        if a.symbol in decls:
            out.append(_diag("error", f"action {a.symbol!r} declared twice", positions,
                             ("decl", a.symbol)))
        decls[a.symbol] = a
    if not sp.roles:
        out.append(Diagnostic("error", "practice declares no roles"))
    if sp.pattern is None:
        out.append(Diagnostic("error", "practice declares no plan pattern"))

    bad_roles = set()

    def role_ref(name, what):
        if name not in roles and name not in bad_roles:
            bad_roles.add(name)
            out.append(_diag("error", f"undeclared role {name!r} in {what}", positions,
                             ("role", name), ("group", name), ("scope", name)))

    for n in sp.norms:
        role_ref(n.role, "norm")
    for s in sp.strategies:
        for g in s.group:
            if g != ALL and g != SELF and not is_variable(g):
                role_ref(g, "strategy")
    for r in sp.requirements:
        if r.role != ALL:
            role_ref(r.role, "requirement")
    for p in sp.promotes:
        if p.role is not None:
            role_ref(p.role, "promotes")
    if sp.pattern is not None:
        for node in pattern_nodes(sp.pattern):
            if isinstance(node, Step) and node.role is not None:
                role_ref(node.role, "pattern step")
    for c in _conditions(sp):
        for sub in _subconditions(c):
            if isinstance(sub, Play):
                role_ref(sub.role, "condition")
            elif isinstance(sub, ForAll):
                role_ref(sub.role, "condition")
            elif isinstance(sub, Cap) and sub.action not in decls:
                out.append(_diag("error", f"undeclared action {sub.action!r}", positions,
                                 ("action", sub.action)))

    reported = set()
    for action, where in action_uses(sp):
        key = (action.symbol, None if action.args is None else len(action.args))
        if key in reported:
            continue
        reported.add(key)
        decl = decls.get(action.symbol)
        if decl is None:
            out.append(_diag("error", f"undeclared action {action.symbol!r} in {where}",
                             positions, ("action", action.symbol)))
        elif action.args is not None and len(action.args) != decl.arity:
            out.append(_diag(
                "error",
                f"action {action.symbol!r} takes {decl.arity} argument(s), "
                f"{len(action.args)} given in {where}",
                positions, ("action", action.symbol)))
    for res in sp.resources:
        for a in res.affords:
            if a not in decls and (a, "afford") not in reported:
                reported.add((a, "afford"))
                out.append(_diag("error", f"resource {res.id!r} affords undeclared action {a!r}",
                                 positions, ("action", a)))
    for r in sp.requirements:
        for a in r.caps:
            if a not in decls and (a, "cap") not in reported:
                reported.add((a, "cap"))
                out.append(_diag("error", f"requirement names undeclared action {a!r}",
                                 positions, ("action", a)))

    contexts = {sp.id} | {c.id for c in sp.contexts}
    for item in tuple(sp.purposes) + tuple(sp.counts_as):
        if item.context and item.context not in contexts:
            out.append(Diagnostic("error", f"undeclared context {item.context!r}"))

    cycle = _counts_as_cycle(sp)
    if cycle:
        out.append(Diagnostic("error", "counts-as cycle: " + " -> ".join(cycle)))
    if _always_true(sp.start, sp.duration):
        out.append(Diagnostic("error", "start and end conditions hold together at every "
                                       "clock stage; the practice can never run"))
    return out


def _fact_known(pattern: Fact, facts) -> bool:
    env = Env(frozenset(), frozenset())
    return any(
        f.pred == pattern.pred and match_args(pattern.args, f.args, {}, env) is not None
        for f in facts
    )


def validate_scenario(sc: Scenario, sp: SocialPractice, positions: dict | None = None) -> list:
    positions = positions or {}
    out = []
    if not sc.agents:
        out.append(Diagnostic("error", "scenario declares no agents", 1, 1))
        return out
    if sc.practice != sp.id:
        out.append(Diagnostic("error", f"scenario is for practice {sc.practice!r}, "
                                       f"not {sp.id!r}"))
    declared = {a.symbol for a in sp.actions}
    seen = set()
    for agent in sc.agents:
        where = ("agent", agent.id)
        if agent.id in seen:
            out.append(_diag("error", f"agent {agent.id!r} declared twice", positions, where))
        seen.add(agent.id)
        for r in agent.plays:
            if r not in sp.roles:
                out.append(_diag("error", f"agent {agent.id!r} plays undeclared role {r!r}",
                                 positions, where))
        extra = sorted(set(agent.caps) - declared)
        if extra:
            out.append(_diag("error", f"agent {agent.id!r} has capabilities for undeclared "
                                      f"actions {', '.join(extra)}", positions, where))
        for a in agent.does:
            if a.symbol not in declared:
                out.append(_diag("error", f"agent {agent.id!r} does undeclared action "
                                          f"{a.symbol!r}", positions, where))
        known = set(agent.beliefs) | set(sc.public)
        for r in agent.plays:
            for req in sp.requirements_for(r):
                for cap in req.caps:
                    if cap not in agent.caps:
                        out.append(_diag("warning", f"agent {agent.id!r} playing {r} lacks "
                                                    f"cap {cap}", positions, where))
                for f in req.knows:
                    if not _fact_known(f, known):
                        out.append(_diag("warning", f"agent {agent.id!r} playing {r} does "
                                                    f"not know {f}", positions, where))
    for req in sp.requirements:
        for f in req.common:
            if not _fact_known(f, sc.public):
                out.append(Diagnostic("warning", f"{f} is not common belief "
                                                 f"(absent from the public tier)"))
    kinds = {r.id for r in sp.resources}
    for inst, kind in sc.resources:
        if kind not in kinds:
            out.append(Diagnostic("error", f"resource instance {inst!r} has undeclared "
                                           f"kind {kind!r}"))
    for fill in sc.fills:
        if fill.action.symbol not in declared:
            out.append(Diagnostic("error", f"fill uses undeclared action {fill.action.symbol!r}"))
    return out


def _raise_errors(diags) -> None:
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ValidationError(errors)


def check_practice(text: str):
    """Parse and validate; returns ``(practice, diagnostics)``.  Syntax errors raise."""
    sp, positions = parse_practice_syntax(text)
    return sp, validate_practice(sp, positions)


def parse_practice(text: str) -> SocialPractice:
    sp, diags = check_practice(text)
    _raise_errors(diags)
    return sp


def check_scenario(text: str, practice: SocialPractice):
    sc, positions = parse_scenario_syntax(text)
    return sc, validate_scenario(sc, practice, positions)


def parse_scenario(text: str, practice: SocialPractice) -> Scenario:
    sc, diags = check_scenario(text, practice)
    _raise_errors(diags)
    return sc


__all__ = [
    "check_practice", "check_scenario", "parse_practice", "parse_scenario",
    "validate_practice", "validate_scenario",
]
