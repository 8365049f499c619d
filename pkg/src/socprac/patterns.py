"""Plan patterns and their automata.

A pattern is a tree of :class:`Step` leaves (an abstract action annotated with
the landmark formula it achieves and optionally the role expected to achieve
it) combined with the composite nodes of :mod:`socprac.actions`.

Compilation follows Thompson's construction with two extra edge kinds for the
interleaving operator: a *fork* that splits one token into two and a *join*
that merges them back.  A configuration is the set of token positions; the
lazily determinised automaton works on sets of epsilon-closed configurations,
so acceptance never depends on the order edges were built in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .actions import (
    Achieve, Atomic, Choice, Parallel, Seq, Star, achievers, effects_entail,
)
from .core import Atom, Env, Fact, condition_actions, condition_facts, conj, holds
from .errors import Diagnostic, Unachievable


@dataclass(frozen=True)
class Step:
    name: str
    formula: tuple
    role: str | None = None
    group: frozenset | None = None

    def __str__(self):
        body = " & ".join(str(f) for f in self.formula) or "true"
        if self.role:
            return f"step({self.name}, {body}, {self.role})"
        return f"step({self.name}, {body})"

    @property
    def action(self) -> Achieve:
        return Achieve(frozenset(self.formula))


@dataclass(frozen=True)
class Skip:
    """Empty pattern.  Internal only: produced when unrolling iterations."""

    group: frozenset | None = None

    def __str__(self):
        return "skip"


def pattern_children(node) -> tuple:
    if isinstance(node, (Choice, Parallel, Seq)):
        return (node.left, node.right)
    if isinstance(node, Star):
        return (node.body,)
    return ()


def pattern_nodes(node) -> Iterator:
    yield node
    for c in pattern_children(node):
        yield from pattern_nodes(c)


def steps(node) -> list:
    return [n for n in pattern_nodes(node) if isinstance(n, Step)]


def node_count(node) -> int:
    return sum(1 for _ in pattern_nodes(node))


def occurs_in(sub, node) -> bool:
    """``gamma1 phi1 in gamma phi``: sub-pattern occurrence (reflexive)."""
    return any(n == sub for n in pattern_nodes(node))


# --------------------------------------------------------------------------
# Automaton
# --------------------------------------------------------------------------


@dataclass
class PatternAutomaton:
    n_states: int
    start: int
    final: int
    labels: dict = field(default_factory=dict)  # state -> [(Step, dst)]
    eps: dict = field(default_factory=dict)  # state -> [dst]
    forks: dict = field(default_factory=dict)  # state -> (left_in, right_in)
    joins: list = field(default_factory=list)  # [(left_out, right_out, dst)]
    steps: dict = field(default_factory=dict)  # name -> Step

    def __post_init__(self):
        self._closure_memo = {}
        self._step_memo = {}

    @property
    def states(self) -> range:
        return range(self.n_states)

    @property
    def accepting(self) -> frozenset:
        return frozenset([self.final])

    @property
    def transitions(self) -> list:
        return [(s, st, d) for s, lst in sorted(self.labels.items()) for st, d in lst]

    # configuration level ---------------------------------------------------

    def closure(self, config: frozenset) -> frozenset:
        """All configurations reachable from ``config`` by silent moves."""
        hit = self._closure_memo.get(config)
        if hit is not None:
            return hit
        seen = {config}
        todo = [config]
        while todo:
            c = todo.pop()
            for nxt in self._silent_moves(c):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        out = frozenset(seen)
        self._closure_memo[config] = out
        return out

    def _silent_moves(self, c: frozenset):
        for q in c:
            rest = c - {q}
            for d in self.eps.get(q, ()):
                yield rest | {d}
            if q in self.forks:
                yield rest | set(self.forks[q])
        for lo, ro, d in self.joins:
            if lo in c and ro in c:
                yield (c - {lo, ro}) | {d}

    # determinised level ----------------------------------------------------

    def initial(self) -> frozenset:
        return self.closure(frozenset([self.start]))

    def step(self, dstate: frozenset, label: str) -> frozenset:
        key = (dstate, label)
        hit = self._step_memo.get(key)
        if hit is not None:
            return hit
        out = set()
        for c in dstate:
            for q in c:
                for st, d in self.labels.get(q, ()):
                    if st.name == label:
                        out |= self.closure((c - {q}) | {d})
        res = frozenset(out)
        self._step_memo[key] = res
        return res

    def is_accepting(self, dstate: frozenset) -> bool:
        return frozenset([self.final]) in dstate

    def alphabet(self) -> list:
        return sorted(self.steps)

    def to_dfa(self) -> tuple:
        """Explicit epsilon-free automaton: (states, start, accepting, delta)."""
        start = self.initial()
        index = {start: 0}
        delta = {}
        todo = [start]
        while todo:
            d = todo.pop()
            for a in self.alphabet():
                n = self.step(d, a)
                if not n:
                    continue
                if n not in index:
                    index[n] = len(index)
                    todo.append(n)
                delta[(index[d], a)] = index[n]
        accepting = frozenset(i for d, i in index.items() if self.is_accepting(d))
        return len(index), 0, accepting, delta

    def distance_to_accept(self, dstate: frozenset) -> int | None:
        """Fewest further landmarks needed to accept (None if impossible)."""
        frontier = [dstate]
        seen = {dstate}
        dist = 0
        while frontier:
            if any(self.is_accepting(d) for d in frontier):
                return dist
            nxt = []
            for d in frontier:
                for a in self.alphabet():
                    n = self.step(d, a)
                    if n and n not in seen:
                        seen.add(n)
                        nxt.append(n)
            frontier = nxt
            dist += 1
        return None


def compile_pattern(pattern) -> PatternAutomaton:
    """Thompson-style construction with fork/join for ``&``."""
    counter = [0]
    labels, eps, forks, joins, named = {}, {}, {}, [], {}

    def new():
        counter[0] += 1
        return counter[0] - 1

    def build(n):
        if isinstance(n, Step):
            s, t = new(), new()
            labels.setdefault(s, []).append((n, t))
            named.setdefault(n.name, n)
            return s, t
        if isinstance(n, Skip):
            s, t = new(), new()
            eps.setdefault(s, []).append(t)
            return s, t
        if isinstance(n, Seq):
            a_in, a_out = build(n.left)
            b_in, b_out = build(n.right)
            eps.setdefault(a_out, []).append(b_in)
            return a_in, b_out
        if isinstance(n, Choice):
            s = new()
            a_in, a_out = build(n.left)
            b_in, b_out = build(n.right)
            t = new()
            eps.setdefault(s, []).extend([a_in, b_in])
            eps.setdefault(a_out, []).append(t)
            eps.setdefault(b_out, []).append(t)
            return s, t
        if isinstance(n, Parallel):
            s = new()
            a_in, a_out = build(n.left)
            b_in, b_out = build(n.right)
            t = new()
            forks[s] = (a_in, b_in)
            joins.append((a_out, b_out, t))
            return s, t
        if isinstance(n, Star):
            s = new()
            a_in, a_out = build(n.body)
            t = new()
            eps.setdefault(s, []).extend([a_in, t])
            eps.setdefault(a_out, []).extend([a_in, t])
            return s, t
        raise TypeError(f"not a plan pattern node: {n!r}")

    start, final = build(pattern)
    return PatternAutomaton(counter[0], start, final, labels, eps, forks, joins, named)


def accepts_labels(automaton: PatternAutomaton, labels: Sequence[str]) -> bool:
    """Exact acceptance of a landmark label sequence."""
    d = automaton.initial()
    for a in labels:
        d = automaton.step(d, a)
        if not d:
            return False
    return automaton.is_accepting(d)


# --------------------------------------------------------------------------
# Trace acceptance over an evolving world state
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Evolution:
    """One event with the effect atoms it added and the environment after it."""

    event: object
    added: frozenset
    env: Env


def establishes(step: Step, ev: Evolution) -> bool:
    formula = step.formula
    if formula and not any(
        any(f.pred == a.pred and len(f.args) == len(a.args) and _fits(f, a, ev.env) for a in ev.added)
        for f in formula
    ):
        return False
    if step.role is not None and not ev.event.group <= ev.env.players(step.role):
        return False
    return holds(conj(*[Atom(f) for f in formula]), ev.env)


def _fits(goal: Fact, fact: Fact, env: Env) -> bool:
    for g, x in zip(goal.args, fact.args):
        if g == x or g == "_" or g[:1].isupper():
            continue
        if env.is_role(g) and x in env.players(g):
            continue
        return False
    return True


@dataclass
class Acceptance:
    accepted: bool
    landmarks: list  # [(step name, event index)]

    def __bool__(self):
        return self.accepted


def accepts(automaton: PatternAutomaton, evolution: Sequence[Evolution]) -> Acceptance:
    """Landmark acceptance: some accepted word is discharged, in order, by events.

    Each landmark is discharged by the final event of a contiguous segment:
    an event whose effects add an atom of the step formula after which the
    whole formula holds.  Events that discharge nothing are skipped.
    """
    current = {automaton.initial(): ()}
    step_list = sorted(automaton.steps.values(), key=lambda s: s.name)
    for i, ev in enumerate(evolution):
        fired = [s.name for s in step_list if establishes(s, ev)]
        if not fired:
            continue
        nxt = dict(current)
        for d, path in current.items():
            for name in fired:
                n = automaton.step(d, name)
                if n and n not in nxt:
                    nxt[n] = path + ((name, i),)
        current = nxt
    best = None
    for d, path in current.items():
        if automaton.is_accepting(d):
            if best is None or (len(path), path) < (len(best), best):
                best = path
    if best is None:
        return Acceptance(False, [])
    return Acceptance(True, list(best))


# --------------------------------------------------------------------------
# Search-time rewriting
# --------------------------------------------------------------------------


def unroll(pattern, k: int):
    """Replace every ``p*`` by at most ``k`` sequential copies of ``p``."""
    if isinstance(pattern, Star):
        body = unroll(pattern.body, k)
        out = Skip()
        for _ in range(k):
            out = Choice(Skip(), Seq(body, out))
        return out
    if isinstance(pattern, (Choice, Parallel, Seq)):
        return type(pattern)(unroll(pattern.left, k), unroll(pattern.right, k), pattern.group)
    return pattern


def restrict(pattern, required: Iterable[str]):
    """Prune choice branches so every step named in ``required`` must occur."""
    required = frozenset(required)
    present = {s.name for s in steps(pattern)}
    missing = required - present
    if missing:
        raise KeyError(f"no step named {sorted(missing)[0]!r} in pattern")

    def names(n):
        return {s.name for s in steps(n)}

    def go(n):
        if isinstance(n, Choice):
            lr, rr = names(n.left) & required, names(n.right) & required
            if lr and not rr:
                return go(n.left)
            if rr and not lr:
                return go(n.right)
            return Choice(go(n.left), go(n.right), n.group)
        if isinstance(n, (Parallel, Seq)):
            return type(n)(go(n.left), go(n.right), n.group)
        if isinstance(n, Star):
            if names(n.body) & required:
                return Seq(go(n.body), n, n.group)
            return n
        return n

    return go(pattern)


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


def nullable(n) -> bool:
    if isinstance(n, (Star, Skip)):
        return True
    if isinstance(n, Step):
        return False
    if isinstance(n, Choice):
        return nullable(n.left) or nullable(n.right)
    return nullable(n.left) and nullable(n.right)


def first_steps(n) -> list:
    if isinstance(n, Step):
        return [n]
    if isinstance(n, Skip):
        return []
    if isinstance(n, Star):
        return first_steps(n.body)
    if isinstance(n, Seq):
        out = first_steps(n.left)
        if nullable(n.left):
            out += [s for s in first_steps(n.right) if s not in out]
        return out
    out = first_steps(n.left)
    return out + [s for s in first_steps(n.right) if s not in out]


def last_steps(n) -> list:
    if isinstance(n, Step):
        return [n]
    if isinstance(n, Skip):
        return []
    if isinstance(n, Star):
        return last_steps(n.body)
    if isinstance(n, Seq):
        out = last_steps(n.right)
        if nullable(n.right):
            out += [s for s in last_steps(n.left) if s not in out]
        return out
    out = last_steps(n.left)
    return out + [s for s in last_steps(n.right) if s not in out]


@dataclass(frozen=True)
class Boundary:
    before: tuple  # steps that may end the left part
    after: tuple  # steps that may start the right part

    def __str__(self):
        left = "+".join(s.name for s in self.before)
        right = "+".join(s.name for s in self.after)
        return f"{left} -> {right}"


def seq_boundaries(pattern) -> list:
    return [
        Boundary(tuple(last_steps(n.left)), tuple(first_steps(n.right)))
        for n in pattern_nodes(pattern)
        if isinstance(n, Seq)
    ]


def _all_caps(practice) -> dict:
    return {"*": frozenset(a.symbol for a in practice.actions)}


def _achieving_symbols(formula, practice) -> set:
    return {a.symbol for a in achievers(formula, practice, _all_caps(practice))}


def strategy_covers(strategy, boundary: Boundary, practice) -> bool:
    """Does ``strategy`` read as ``strategy(DONE(A', g1 phi1), DO(A'', g2 phi2))``?"""
    roles = practice.roles
    before_facts = [f for s in boundary.before for f in s.formula]
    cond_ok = False
    for fact, positive in condition_facts(strategy.condition):
        if positive and any(effects_entail([fact], [g], roles) or effects_entail([g], [fact], roles)
                            for g in before_facts):
            cond_ok = True
    for act in condition_actions(strategy.condition):
        for s in boundary.before:
            if act.symbol in _achieving_symbols(s.formula, practice):
                cond_ok = True
    if not cond_ok:
        return False
    action = strategy.action
    for s in boundary.after:
        if isinstance(action, Achieve) and action.formula and set(action.formula) <= set(s.formula):
            return True
        if isinstance(action, Atomic) and action.action.symbol in _achieving_symbols(s.formula, practice):
            return True
    return False


def _suggest(boundary: Boundary) -> str:
    cond = " | ".join(" & ".join(str(f) for f in s.formula) for s in boundary.before) or "true"
    target = boundary.after[0]
    group = target.role or "all"
    return f"{cond} => DO({group}, @({' & '.join(str(f) for f in target.formula)}))"


def validate_planpattern(practice, caps=None) -> list:
    """Diagnostics for the plan pattern of ``practice``.

    Checks step achievability, reports purposes that are only derivable from
    step annotations, and warns about sequence boundaries no strategy covers.
    """
    out = []
    pattern = practice.pattern
    if pattern is None:
        return [Diagnostic("error", "practice has no plan pattern")]
    caps = caps if caps is not None else _all_caps(practice)
    explicit = {tuple(sorted(p.action.formula)) for p in practice.purposes if isinstance(p.action, Achieve)}
    for s in steps(pattern):
        if not achievers(s.formula, practice, caps):
            out.append(Diagnostic("error", str(Unachievable(frozenset(s.formula))) + f" (step {s.name})"))
        if tuple(sorted(s.formula)) not in explicit:
            out.append(Diagnostic("info", f"purpose of step {s.name} derived from its landmark"))
    finals = " | ".join(" & ".join(str(f) for f in s.formula) for s in last_steps(pattern))
    out.append(Diagnostic("info", f"purpose of the whole pattern derived as {finals}"))
    for b in seq_boundaries(pattern):
        if not any(strategy_covers(st, b, practice) for st in practice.strategies):
            out.append(Diagnostic(
                "warning",
                f"sequence boundary {b} has no strategy; suggest: {_suggest(b)}",
            ))
    return out


__all__ = [
    "Step", "Skip", "PatternAutomaton", "compile_pattern", "accepts_labels", "accepts",
    "Evolution", "Acceptance", "unroll", "restrict", "validate_planpattern",
    "seq_boundaries", "steps", "node_count", "occurs_in",
]
