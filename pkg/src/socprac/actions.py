"""Complex actions: the five constructors, ``act(gamma)``, group distribution and
grounding of abstract achievement actions.

Plan patterns reuse the composite nodes defined here with :class:`Step` leaves
(see :mod:`socprac.patterns`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .core import AtomicAction, Fact, SELF, WILDCARD, is_variable
from .errors import EmptyGroup, Unachievable


class ComplexAction:
    __slots__ = ()


@dataclass(frozen=True)
class Atomic(ComplexAction):
    action: AtomicAction
    group: frozenset | None = None

    def __str__(self):
        return _annotate(str(self.action), self.group)


@dataclass(frozen=True)
class Achieve(ComplexAction):
    """Abstract action ``alpha phi``; with a group it is ``alpha(A) phi``."""

    formula: frozenset
    group: frozenset | None = None

    def __str__(self):
        body = "@(" + " & ".join(str(f) for f in sorted(self.formula)) + ")" if self.formula else "@true"
        return _annotate(body, self.group)


@dataclass(frozen=True)
class Choice(ComplexAction):
    left: object
    right: object
    group: frozenset | None = None

    def __str__(self):
        return _annotate(f"({self.left} + {self.right})", self.group)


@dataclass(frozen=True)
class Parallel(ComplexAction):
    left: object
    right: object
    group: frozenset | None = None

    def __str__(self):
        return _annotate(f"({self.left} & {self.right})", self.group)


@dataclass(frozen=True)
class Seq(ComplexAction):
    left: object
    right: object
    group: frozenset | None = None

    def __str__(self):
        return _annotate(f"({self.left} ; {self.right})", self.group)


@dataclass(frozen=True)
class Star(ComplexAction):
    body: object
    group: frozenset | None = None

    def __str__(self):
        return _annotate(f"({self.body})*", self.group)


BINARY = (Choice, Parallel, Seq)


def _annotate(text: str, group) -> str:
    if group is None:
        return text
    return f"{text}[{','.join(sorted(group))}]"


def AchieveBy(group: Iterable[str], formula: Iterable[Fact]) -> Achieve:
    return Achieve(frozenset(formula), frozenset(group))


def children(node) -> tuple:
    if isinstance(node, BINARY):
        return (node.left, node.right)
    if isinstance(node, Star):
        return (node.body,)
    return ()


def walk(node) -> Iterator:
    yield node
    for c in children(node):
        yield from walk(c)


def basic_actions(g) -> frozenset:
    """``act(gamma)``: symbols of the atomic actions occurring in ``g``."""
    if isinstance(g, Atomic):
        return frozenset([g.action.symbol])
    if isinstance(g, Achieve):
        return frozenset()
    out = frozenset()
    for c in children(g):
        out |= basic_actions(c)
    return out


def atomic_leaves(g) -> list:
    return [n.action for n in walk(g) if isinstance(n, Atomic)]


# --------------------------------------------------------------------------
# Group distribution
# --------------------------------------------------------------------------


def _nonempty_subsets(agents: Sequence[str]) -> list:
    agents = sorted(agents)
    out = []
    for k in range(1, len(agents) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(agents, k))
    out.sort(key=lambda s: tuple(sorted(s)))
    return out


def covering_pairs(group: frozenset) -> list:
    """All ``(A', A'')`` of nonempty subsets with ``A' | A'' == group``."""
    subs = _nonempty_subsets(group)
    return [(x, y) for x in subs for y in subs if x | y == group]


def enumerate_splits(group: Iterable[str], g) -> Iterator[dict]:
    """Every assignment of agent sets to the positions of ``g`` for ``g(group)``.

    Positions are tuples of child indices (``()`` is the root).  A node carrying
    its own group annotation keeps that group.  Star bodies receive the whole
    group here; executions re-split per iteration (see :func:`accepts_group`).
    """
    group = frozenset(group)
    if not group:
        raise EmptyGroup("cannot distribute an action over an empty group")
    yield from _splits(g, group, ())


def _splits(g, group, pos):
    if g.group is not None:
        group = g.group
    if isinstance(g, BINARY):
        fixed_l, fixed_r = g.left.group, g.right.group
        if fixed_l is not None and fixed_r is not None:
            pairs = [(fixed_l, fixed_r)] if fixed_l | fixed_r == group else []
        else:
            pairs = covering_pairs(group)
            if fixed_l is not None:
                pairs = [p for p in pairs if p[0] == fixed_l]
            if fixed_r is not None:
                pairs = [p for p in pairs if p[1] == fixed_r]
        for a1, a2 in pairs:
            for left in _splits(g.left, a1, pos + (0,)):
                for right in _splits(g.right, a2, pos + (1,)):
                    yield {pos: group, **left, **right}
    elif isinstance(g, Star):
        for body in _splits(g.body, group, pos + (0,)):
            yield {pos: group, **body}
    else:
        yield {pos: group}


def accepts_group(g, group: Iterable[str], events: Sequence[tuple]) -> bool:
    """Whether the ``(performers, AtomicAction)`` sequence executes ``g(group)``.

    An atomic leaf assigned group G is matched by exactly one event of that
    action performed jointly by G.  Composite nodes distribute their group per
    ``gamma(A) == exists A', A'': A' | A'' == A and gamma1(A') o gamma2(A'')``;
    a node annotated with its own group is performed by that group.
    """
    events = tuple((frozenset(p), a) for p, a in events)
    group = frozenset(group)
    if not group:
        raise EmptyGroup("cannot execute an action with an empty group")
    return _acc(g, group, events)


@lru_cache(maxsize=None)
def _acc(g, group, word) -> bool:
    if g.group is not None:
        group = g.group
    if isinstance(g, Atomic):
        return len(word) == 1 and word[0][0] == group and _same_action(g.action, word[0][1])
    if isinstance(g, Achieve):
        raise Unachievable(g.formula)
    if isinstance(g, Star):
        if not word:
            return True
        for k in range(1, len(word) + 1):
            for a1, a2 in covering_pairs(group):
                if _acc(g.body, a1, word[:k]) and _acc(Star(g.body), a2, word[k:]):
                    return True
        return False
    pairs = covering_pairs(group)
    if isinstance(g, Choice):
        return any(_acc(g.left, a1, word) or _acc(g.right, a2, word) for a1, a2 in pairs)
    if isinstance(g, Seq):
        return any(
            _acc(g.left, a1, word[:k]) and _acc(g.right, a2, word[k:])
            for k in range(len(word) + 1)
            for a1, a2 in pairs
        )
    if isinstance(g, Parallel):
        n = len(word)
        for mask in range(1 << n):
            lw = tuple(word[i] for i in range(n) if mask >> i & 1)
            rw = tuple(word[i] for i in range(n) if not mask >> i & 1)
            if any(_acc(g.left, a1, lw) and _acc(g.right, a2, rw) for a1, a2 in pairs):
                return True
        return False
    raise TypeError(f"not a complex action: {g!r}")


def _same_action(pattern: AtomicAction, action: AtomicAction) -> bool:
    if pattern.symbol != action.symbol:
        return False
    return pattern.args is None or pattern.args == action.args


# --------------------------------------------------------------------------
# Abstract actions
# --------------------------------------------------------------------------


def _term_fits(goal: str, effect: str) -> bool:
    if goal == effect or goal == WILDCARD:
        return True
    return effect == SELF or is_variable(effect) or is_variable(goal)


def fact_entailed(goal: Fact, effects: Iterable[Fact], roles: Iterable[str] = ()) -> bool:
    """Set-inclusion entailment with parameter matching (no inference)."""
    roles = frozenset(roles)
    for e in effects:
        if e.pred != goal.pred or len(e.args) != len(goal.args):
            continue
        if all(_term_fits(g, x) or (g in roles and (x == SELF or is_variable(x) or x in roles))
               for g, x in zip(goal.args, e.args)):
            return True
    return False


def effects_entail(formula: Iterable[Fact], effects: Iterable[Fact], roles=()) -> bool:
    effects = tuple(effects)
    return all(fact_entailed(f, effects, roles) for f in formula)


def achievers(formula: Iterable[Fact], practice, caps: Mapping[str, Iterable[str]],
              group: Iterable[str] | None = None) -> list:
    """Declared action shapes whose execution establishes ``formula``.

    An action qualifies when its own effects entail the formula, or when it
    counts as (transitively) an action whose effects do.  Only actions some
    capable actor (restricted to ``group`` when given) can perform are kept.
    """
    formula = frozenset(formula)
    decls = {a.symbol: a for a in practice.actions}
    roles = frozenset(practice.roles)
    performers = sorted(caps) if group is None else sorted(group)
    capable = set()
    for agent in performers:
        capable |= set(caps.get(agent, ()))

    direct = {s for s, d in decls.items() if effects_entail(formula, d.adds, roles)} if formula \
        else set(decls)
    found = {}
    for s in sorted(direct):
        if s in capable:
            found[str(decls[s].shape)] = decls[s].shape
    # Counts-as sources, followed backwards until closure.
    frontier = set(direct)
    seen = set(direct)
    while frontier:
        nxt = set()
        for rule in practice.counts_as:
            if rule.target.symbol in frontier and rule.source.symbol not in seen:
                if rule.source.symbol in capable:
                    found[str(rule.source)] = rule.source
                nxt.add(rule.source.symbol)
                seen.add(rule.source.symbol)
        frontier = nxt
    return [found[k] for k in sorted(found)]


def choice_of(actions: Sequence[AtomicAction], group=None):
    nodes = [Atomic(a) for a in actions]
    out = nodes[-1]
    for n in reversed(nodes[:-1]):
        out = Choice(n, out)
    if group is not None:
        out = _with_group(out, group)
    return out


def _with_group(node, group):
    return type(node)(*[getattr(node, f) for f in node.__dataclass_fields__ if f != "group"],
                      group=frozenset(group))


def ground_abstract(g, practice, caps: Mapping[str, Iterable[str]]):
    """Replace every ``Achieve`` node by the choice of actions achieving it.

    Raises :class:`Unachievable` when an abstract action has no grounding.
    """
    if isinstance(g, Achieve):
        found = achievers(g.formula, practice, caps, g.group)
        if not found:
            raise Unachievable(g.formula)
        return choice_of(found, g.group)
    if isinstance(g, BINARY):
        return type(g)(ground_abstract(g.left, practice, caps),
                       ground_abstract(g.right, practice, caps), g.group)
    if isinstance(g, Star):
        return Star(ground_abstract(g.body, practice, caps), g.group)
    return g
