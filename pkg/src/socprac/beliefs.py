"""Private and public belief tiers, EB/CB over groups, and goal attribution.

Common belief is kept extensionally: publishing a fact to a group puts it in
that group's public tier and in every member's private beliefs, so
``common_belief -> everyone_believes -> believes`` holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .actions import Achieve, Atomic, achievers, atomic_leaves
from .core import Env, Fact, TraceEvent, match_action
from .errors import UnknownAgent


class BeliefStore:
    def __init__(self, agents: Iterable[str] = ()):
        self.private: dict[str, set] = {a: set() for a in agents}
        self.public: dict[frozenset, set] = {}

    def _known(self, agent: str) -> None:
        if agent not in self.private:
            raise UnknownAgent(agent)

    def add_agent(self, agent: str) -> None:
        self.private.setdefault(agent, set())

    def tell(self, agent: str, fact: Fact) -> None:
        self._known(agent)
        self.private[agent].add(fact)

    def publish(self, group: Iterable[str], fact: Fact) -> None:
        group = frozenset(group)
        for a in group:
            self._known(a)
        self.public.setdefault(group, set()).add(fact)
        for a in group:
            self.private[a].add(fact)

    def view(self, agent: str) -> frozenset:
        """Everything ``agent`` believes: private plus public tiers it is in."""
        self._known(agent)
        out = set(self.private[agent])
        for g, facts in self.public.items():
            if agent in g:
                out |= facts
        return frozenset(out)

    def public_view(self, group: Iterable[str]) -> frozenset:
        """Facts common to ``group`` (public tiers of any supergroup)."""
        group = frozenset(group)
        out = set()
        for g, facts in self.public.items():
            if group <= g:
                out |= facts
        return frozenset(out)

    def believes(self, agent: str, fact: Fact) -> bool:
        return fact in self.view(agent)

    def everyone_believes(self, group: Iterable[str], fact: Fact) -> bool:
        return all(self.believes(a, fact) for a in group)

    def common_belief(self, group: Iterable[str], fact: Fact) -> bool:
        group = frozenset(group)
        for a in group:
            self._known(a)
        return any(group <= g and fact in facts for g, facts in self.public.items())

    def snapshot(self) -> dict:
        return {
            "private": {a: sorted(str(f) for f in fs) for a, fs in sorted(self.private.items())},
            "public": [
                {"group": sorted(g), "facts": sorted(str(f) for f in fs)}
                for g, fs in sorted(self.public.items(), key=lambda kv: sorted(kv[0]))
            ],
        }


# --------------------------------------------------------------------------
# Purposes and goal attribution
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GoalAttribution:
    agent: str
    formula: tuple
    event: int  # index of the justifying event in the trace
    purpose: int  # index of the purpose declaration

    def __str__(self):
        return f"Goal({self.agent}, {' & '.join(str(f) for f in self.formula)})"


def _purpose_matches(decl, event: TraceEvent, env: Env, practice) -> list:
    """Bindings under which ``event`` is (part of) the purpose's action."""
    action = decl.action
    if isinstance(action, Achieve):
        caps = {a: frozenset(s.symbol for s in practice.actions) for a in event.group}
        candidates = achievers(action.formula, practice, caps)
    elif isinstance(action, Atomic):
        candidates = [action.action]
    else:
        candidates = atomic_leaves(action)
    out = []
    for pattern in candidates:
        b = match_action(pattern, event.action, {}, env)
        if b is not None:
            out.append(b)
    return out


def attribute_goals(event: TraceEvent, index: int, practice, env: Env, salient_for) -> list:
    """Goal attributions justified by ``event`` (at trace position ``index``).

    ``salient_for(agent)`` returns the id of the agent's salient context (or
    None when none or ambiguous).  A purpose declared for a context only fires
    for performers for whom that context is salient.
    """
    out = []
    for i, decl in enumerate(practice.purposes):
        context = decl.context or practice.id
        for agent in sorted(event.group):
            if salient_for(agent) != context:
                continue
            if decl.scope is not None:
                if env.is_role(decl.scope):
                    if agent not in env.players(decl.scope):
                        continue
                elif decl.scope != agent:
                    continue
            for b in _purpose_matches(decl, event, env, practice):
                binding = dict(b)
                for f in decl.formula:
                    for t in f.args:
                        if env.is_role(t) and t not in binding and agent in env.players(t):
                            binding[t] = agent
                formula = tuple(f.substitute({**binding, "self": agent}) for f in decl.formula)
                g = GoalAttribution(agent, formula, index, i)
                if g not in out:
                    out.append(g)
                break
    return out
