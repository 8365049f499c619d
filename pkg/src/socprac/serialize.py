"""Canonical text form of practices and scenarios.

Sections are written in a fixed order; entries inside a section keep their
declaration order, so counts-as and norm order survive a round trip.
"""

from __future__ import annotations

from .actions import Achieve, Atomic, Choice, Parallel, Seq, Star
from .core import FALSE, TRUE
from .model import Scenario, SocialPractice
from .patterns import Step

_PREC = {Choice: 1, Seq: 2, Parallel: 3, Star: 4}
_OPS = {Choice: "+", Seq: ";", Parallel: "&"}


def _group(group) -> str:
    if len(group) == 1:
        return group[0]
    return "{" + ", ".join(group) + "}"


def _prec(node) -> int:
    if node.group is not None:
        return 5
    return _PREC.get(type(node), 5)


def expr_str(node) -> str:
    """Action expression or plan pattern with the fewest parentheses."""
    if isinstance(node, (Atomic, Achieve, Step)):
        if isinstance(node, Atomic):
            text = str(node.action)
        elif isinstance(node, Achieve):
            text = "@(" + " & ".join(str(f) for f in sorted(node.formula)) + ")" \
                if node.formula else "@true"
        else:
            text = str(node)
    elif isinstance(node, Star):
        body = expr_str(node.body)
        text = (f"({body})" if _prec(node.body) < 4 else body) + "*"
    else:
        p = _PREC[type(node)]
        left, right = expr_str(node.left), expr_str(node.right)
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        text = f"{left} {_OPS[type(node)]} {right}"
    group = getattr(node, "group", None)
    if group is not None:
        if not isinstance(node, (Atomic, Achieve, Step)) and not isinstance(node, Star):
            text = f"({text})"
        text += "[" + ", ".join(sorted(group)) + "]"
    return text


def _formula(facts) -> str:
    return " & ".join(str(f) for f in facts) or "true"


def _block(name: str, items: list) -> list:
    if not items:
        return []
    lines = [f"  {name} {{"]
    for i, item in enumerate(items):
        lines.append(f"    {item}" + (";" if i < len(items) - 1 else ""))
    lines.append("  }")
    return lines


def _action_decl(a) -> str:
    text = a.symbol
    if a.params:
        text += "(" + ", ".join(a.params) + ")"
    if a.pre != TRUE:
        text += f" pre {a.pre}"
    if a.adds or a.dels:
        effects = [str(f) for f in a.adds] + [f"not {f}" for f in a.dels]
        text += " effects " + " ".join(effects)
    return text


def _requirement(r) -> str:
    parts = [f"cap {c}" for c in r.caps]
    parts += [f"knows {f}" for f in r.knows]
    parts += [f"common {f}" for f in r.common]
    return f"{r.role}: " + " ".join(parts)


def serialize(sp: SocialPractice) -> str:
    out = [f"practice {sp.id} {{"]
    if sp.roles:
        out.append("  roles { " + ", ".join(sp.roles) + " }")
    out += _block("resources", [f"{r.id} affords {' '.join(r.affords)}" for r in sp.resources])
    if sp.places:
        out.append("  places { " + ", ".join(sp.places) + " }")
    for p in sp.purposes:
        scope = f"{p.scope}: " if p.scope else ""
        ctx = f" in {p.context}" if p.context else ""
        out.append(f"  purpose {scope}{expr_str(p.action)} => {_formula(p.formula)}{ctx}")
    out += _block("promotes", [
        (f"{p.role}: " if p.role else "") + f"{p.action} -> {p.polarity} {p.value}"
        for p in sp.promotes
    ])
    out += _block("counts_as", [
        f"{c.source} => {c.target}" + (f" in {c.context}" if c.context else "")
        for c in sp.counts_as
    ])
    if sp.pattern is not None:
        out.append(f"  pattern {expr_str(sp.pattern)}")
    out += _block("norms", [
        f"{n.deontic}({n.role}, {n.condition}, {expr_str(n.action)})"
        + (f" else {n.sanction}" if n.sanction else "")
        for n in sp.norms
    ])
    out += _block("strategies", [
        f"{s.condition} => DO({_group(s.group)}, {expr_str(s.action)})" for s in sp.strategies
    ])
    if sp.start != TRUE:
        out.append(f"  start {sp.start}")
    if sp.duration != FALSE:
        out.append(f"  end {sp.duration}")
    if sp.when != TRUE:
        out.append(f"  when {sp.when}")
    out += _block("actions", [_action_decl(a) for a in sp.actions])
    out += _block("requires", [_requirement(r) for r in sp.requirements])
    out.append("}")
    for c in sp.contexts:
        out += ["", f"context {c.id} {{"]
        if c.when != TRUE:
            out.append(f"  when {c.when}")
        out.append("}")
    return "\n".join(out) + "\n"


def serialize_scenario(sc: Scenario) -> str:
    out = [f"scenario {sc.id} for {sc.practice} {{", f"  seed {sc.seed}"]
    out += _block("clock", [f"{h} @ {t}" for h, t in sc.clock])
    out += _block("resources", [f"{i}: {k}" for i, k in sc.resources])
    out += _block("facts", [str(f) for f in sc.facts])
    out += _block("public", [str(f) for f in sc.public])
    for f in sc.fills:
        out.append(f"  fill {_formula(f.formula)} with {f.action} * {f.count}")
    for a in sc.agents:
        head = f"  agent {a.id}" + (f" plays {', '.join(a.plays)}" if a.plays else "")
        items = []
        if a.caps:
            items.append("caps " + " ".join(a.caps))
        if a.beliefs:
            items.append("believes " + ", ".join(str(f) for f in a.beliefs))
        if a.violator:
            items.append("violator")
        items += [f"does {d}" for d in a.does]
        if not items:
            out.append(head)
            continue
        out.append(head + " {")
        for i, item in enumerate(items):
            out.append(f"    {item}" + (";" if i < len(items) - 1 else ""))
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"
