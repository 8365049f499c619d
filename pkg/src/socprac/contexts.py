"""Contexts, the pairwise salience function and most-salient resolution.

Specificity is decided syntactically: ``Psi1 -> Psi2`` is taken to hold when the
top-level conjuncts of ``Psi1`` include all conjuncts of ``Psi2``.
Incomparable active contexts are reported, never silently ordered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import (
    FALSE, TRUE, AtomicAction, Condition, Env, Not, TraceEvent, conj, conjuncts, holds,
)


@dataclass(frozen=True)
class Context:
    id: str
    activation: Condition = TRUE
    is_practice: bool = False
    start: Condition = TRUE
    duration: Condition = FALSE

    @property
    def condition(self) -> Condition:
        if self.is_practice:
            return conj(self.start, Not(self.duration), self.activation)
        return self.activation

    def conjuncts(self) -> frozenset:
        return conjuncts(self.condition)


class _Unordered:
    def __repr__(self):
        return "Unordered"

    def __bool__(self):
        return False


UNORDERED = _Unordered()


@dataclass(frozen=True)
class Ambiguous:
    candidates: tuple

    def __str__(self):
        return "Ambiguous{" + ", ".join(c.id for c in self.candidates) + "}"


def practice_context(practice) -> Context:
    return Context(practice.id, practice.when, True, practice.start, practice.duration)


def registry_for(practice) -> list:
    """The practice itself (every practice is a context) plus declared contexts."""
    return [practice_context(practice)] + [Context(c.id, c.when) for c in practice.contexts]


def _env_for(env: Env, agent: str, action: AtomicAction | None) -> Env:
    if action is None:
        return env
    tick = max((e.tick for e in env.trace), default=-1) + 1
    upcoming = (TraceEvent(tick, frozenset([agent]), action),)
    return Env(env.facts, env.roles, env.caps, env.trace, upcoming, env.vocab)


def is_active(c: Context, agent: str, action: AtomicAction | None, env: Env) -> bool:
    """``active(a, gamma, c)``: the context's condition with ``self`` bound to ``agent``."""
    return holds(c.condition, _env_for(env, agent, action), {"self": agent})


def implies(c1: Context, c2: Context) -> bool:
    return c1.conjuncts() >= c2.conjuncts()


def salient_pair(c1: Context, c2: Context, agent: str, action, env: Env):
    a1 = is_active(c1, agent, action, env)
    a2 = c1 == c2 and a1 or is_active(c2, agent, action, env)
    if not a1 and not a2:
        return None
    if a1 and not a2:
        return c1
    if a2 and not a1:
        return c2
    if c1 == c2:
        return c1
    i12, i21 = implies(c1, c2), implies(c2, c1)
    if i12 and not i21:
        return c1
    if i21 and not i12:
        return c2
    return UNORDERED


def most_salient(agent: str, action, env: Env, registry: Sequence[Context],
                 order: Sequence[str] | None = None):
    """The active context no other context is more salient than.

    Returns a :class:`Context`, an :class:`Ambiguous` carrying the maximal
    candidates, or None when nothing is active.  ``order`` is an explicit
    priority list of context ids used to break ties among maximal candidates.
    """
    active = [c for c in registry if is_active(c, agent, action, env)]
    if not active:
        return None
    maximal = []
    for c in active:
        dominated = False
        for other in active:
            if other is c:
                continue
            if salient_pair(c, other, agent, action, env) == other:
                dominated = True
                break
        if not dominated:
            maximal.append(c)
    if len(maximal) == 1:
        return maximal[0]
    if order:
        for cid in order:
            for c in maximal:
                if c.id == cid:
                    return c
    return Ambiguous(tuple(sorted(maximal, key=lambda c: c.id)))


def salient_id(agent: str, env: Env, registry, order=None) -> str | None:
    s = most_salient(agent, None, env, registry, order)
    return s.id if isinstance(s, Context) else None
