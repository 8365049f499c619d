"""Lexer and recursive-descent parser for ``.sp`` practices and ``.scn`` scenarios.

Line comments start with ``--``.  Binary operators in action expressions and
plan patterns bind, from loosest to tightest: ``+`` (choice), ``;``
(sequence), ``&`` (parallel); ``*`` and a ``[a,b]`` group annotation are
postfix.  Conditions use ``|``, ``&``, ``not`` and ``forall r: ...``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .actions import Achieve, Atomic, Choice, Parallel, Seq, Star
from .core import (
    FALSE, TRUE, And, Atom, AtomicAction, Cap, Do, Done, Fact, ForAll, Not, Or, Play,
)
from .errors import DslSyntaxError
from .model import (
    ActionDecl, AgentDecl, ContextDecl, CountsAsRule, Fill, Norm, PromotesRule,
    PurposeDecl, Requirement, ResourceDecl, Scenario, SocialPractice, Strategy,
)
from .patterns import Step

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<punct>=>|->|[{}()\[\],;:&|+\-*@~])
  | (?P<id>[A-Za-z0-9_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

CONDITION_WORDS = ("true", "false", "not", "forall", "done", "do", "play", "cap")


@dataclass(frozen=True)
class Token:
    kind: str  # "id", "punct" or "eof"
    text: str
    line: int
    column: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(text: str) -> list:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind in ("id", "punct"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.positions: dict = {}  # (kind, name) -> (line, column), first occurrence

    # ---------------------------------------------------------------- basics

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text in texts

    def error(self, expected=(), message=None):
        t = self.tok
        msg = message or f"unexpected {t.describe()}"
        raise DslSyntaxError(msg, t.line, t.column, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error((repr(text),))
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "id":
            self.error((what,))
        t = self.tok
        self.i += 1
        return t.text

    def number(self, what: str = "number") -> int:
        t = self.tok
        if t.kind != "id" or not t.text.isdigit():
            self.error((what,))
        self.i += 1
        return int(t.text)

    def note(self, kind: str, name: str, tok: Token | None = None) -> None:
        tok = tok or self.tokens[self.i - 1]
        self.positions.setdefault((kind, name), (tok.line, tok.column))

    def block(self, item):
        """``{ item (; item)* [;] }`` returning the list of items."""
        self.expect("{")
        out = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error(("'}'",))
            out.append(item())
            if not self.accept(";") and not self.at("}"):
                self.error(("';'", "'}'"))
        return out

    def id_list(self) -> list:
        """``{ a, b c }``: identifiers separated by commas or whitespace."""
        self.expect("{")
        out = []
        while not self.accept("}"):
            out.append(self.ident())
            self.accept(",")
        return out

    # ------------------------------------------------------- terms and facts

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.ident("term"))
            while self.accept(","):
                out.append(self.ident("term"))
        self.expect(")")
        return tuple(out)

    def fact(self) -> Fact:
        name = self.ident("fact")
        if self.at("("):
            return Fact(name, self.args())
        return Fact(name)

    def formula(self) -> tuple:
        """Conjunction of facts; ``true`` is the empty conjunction."""
        if self.accept("true"):
            return ()
        out = [self.fact()]
        while self.accept("&"):
            out.append(self.fact())
        return tuple(out)

    def atomic_action(self) -> AtomicAction:
        tok = self.tok
        name = self.ident("action")
        self.note("action", name, tok)
        if self.at("("):
            return AtomicAction(name, self.args())
        return AtomicAction(name, None)

    def group(self) -> tuple:
        if self.accept("{"):
            out = [self.ident("agent")]
            while self.accept(","):
                out.append(self.ident("agent"))
            self.expect("}")
            return tuple(out)
        tok = self.tok
        name = self.ident("group")
        self.note("group", name, tok)
        return (name,)

    # ------------------------------------------------------------ conditions

    def condition(self):
        parts = [self.conjunction()]
        while self.accept("|"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        t = self.tok
        if self.accept("("):
            c = self.condition()
            self.expect(")")
            return c
        if t.kind != "id":
            self.error(("condition",))
        word = t.text
        if word == "not":
            self.i += 1
            return Not(self.unary())
        if word == "true":
            self.i += 1
            return TRUE
        if word == "false":
            self.i += 1
            return FALSE
        if word == "forall":
            self.i += 1
            role = self.ident("role")
            self.note("role", role)
            self.expect(":")
            return ForAll(role, self.unary())
        if word in ("done", "do") and self.peek().text == "(":
            self.i += 2
            last = True
            if word == "done" and self.at("any") and self.peek().text == ":":
                self.i += 2
                last = False
            group = self.group()
            self.expect(",")
            action = self.atomic_action()
            self.expect(")")
            return Done(group, action, last) if word == "done" else Do(group, action)
        if word in ("play", "cap") and self.peek().text == "(":
            self.i += 2
            agent = self.ident("agent")
            self.expect(",")
            tok = self.tok
            other = self.ident("role" if word == "play" else "action")
            self.note("role" if word == "play" else "action", other, tok)
            self.expect(")")
            return Play(agent, other) if word == "play" else Cap(agent, other)
        return Atom(self.fact())

    # ---------------------------------------- action expressions and patterns

    def expression(self, primary):
        left = self.seq_expr(primary)
        while self.accept("+"):
            left = Choice(left, self.seq_expr(primary))
        return left

    def seq_expr(self, primary):
        left = self.par_expr(primary)
        while self.accept(";"):
            left = Seq(left, self.par_expr(primary))
        return left

    def par_expr(self, primary):
        left = self.postfix(primary)
        while self.accept("&"):
            left = Parallel(left, self.postfix(primary))
        return left

    def postfix(self, primary):
        if self.accept("("):
            node = self.expression(primary)
            self.expect(")")
        else:
            node = primary()
        while True:
            if self.accept("*"):
                node = Star(node)
            elif self.at("["):
                self.i += 1
                names = [self.ident("agent")]
                while self.accept(","):
                    names.append(self.ident("agent"))
                self.expect("]")
                node = replace(node, group=frozenset(names))
            else:
                return node

    def action_primary(self):
        if self.accept("@"):
            if self.accept("true"):
                return Achieve(frozenset())
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return Achieve(frozenset(f))
        return Atomic(self.atomic_action())

    def step(self):
        self.expect("step")
        self.expect("(")
        name = self.ident("step name")
        self.expect(",")
        f = self.formula()
        role = None
        if self.accept(","):
            tok = self.tok
            role = self.ident("role")
            self.note("role", role, tok)
        self.expect(")")
        return Step(name, f, role)

    def action_expr(self):
        return self.expression(self.action_primary)

    def pattern(self):
        return self.expression(self.step)

    # -------------------------------------------------------------- practice

    SECTIONS = (
        "roles", "resources", "places", "purpose", "promotes", "counts_as", "pattern",
        "norms", "strategies", "start", "end", "actions", "requires", "when",
    )

    def practice_file(self):
        if self.tok.kind == "eof":
            self.error(("'practice'",), "empty document")
        practice = None
        contexts = []
        while self.tok.kind != "eof":
            if self.at("practice"):
                if practice is not None:
                    self.error(message="only one practice per document")
                practice = self.practice()
            elif self.at("context"):
                contexts.append(self.context())
            else:
                self.error(("'practice'", "'context'"))
        if practice is None:
            self.error(("'practice'",), "no practice declared")
        return replace(practice, contexts=practice.contexts + tuple(contexts))

    def context(self) -> ContextDecl:
        self.expect("context")
        cid = self.ident("context id")
        self.expect("{")
        when = TRUE
        if self.accept("when"):
            when = self.condition()
        self.expect("}")
        return ContextDecl(cid, when)

    def practice(self) -> SocialPractice:
        self.expect("practice")
        pid = self.ident("practice id")
        self.expect("{")
        f: dict = {"purposes": [], "contexts": []}
        seen = set()
        while not self.accept("}"):
            t = self.tok
            if t.kind != "id" or t.text not in self.SECTIONS + ("context",):
                self.error(tuple(repr(s) for s in self.SECTIONS) + ("'}'",))
            word = t.text
            if word in seen and word not in ("purpose", "context"):
                self.error(message=f"duplicate section {word!r}")
            seen.add(word)
            if word == "context":
                f["contexts"].append(self.context())
                continue
            self.i += 1
            if word == "roles":
                f["roles"] = tuple(self.id_list())
            elif word == "places":
                f["places"] = tuple(self.id_list())
            elif word == "resources":
                f["resources"] = tuple(self.block(self.resource))
            elif word == "purpose":
                f["purposes"].append(self.purpose())
            elif word == "promotes":
                f["promotes"] = tuple(self.block(self.promote))
            elif word == "counts_as":
                f["counts_as"] = tuple(self.block(self.counts_as))
            elif word == "pattern":
                f["pattern"] = self.pattern()
            elif word == "norms":
                f["norms"] = tuple(self.block(self.norm))
            elif word == "strategies":
                f["strategies"] = tuple(self.block(self.strategy))
            elif word == "start":
                f["start"] = self.condition()
            elif word == "end":
                f["duration"] = self.condition()
            elif word == "actions":
                f["actions"] = tuple(self.block(self.action_decl))
            elif word == "requires":
                f["requirements"] = tuple(self.block(self.requirement))
            elif word == "when":
                f["when"] = self.condition()
        f["purposes"] = tuple(f["purposes"])
        f["contexts"] = tuple(f["contexts"])
        return SocialPractice(pid, **f)

    def resource(self) -> ResourceDecl:
        rid = self.ident("resource")
        self.expect("affords")
        affords = []
        while self.tok.kind == "id":
            tok = self.tok
            affords.append(self.ident())
            self.note("action", affords[-1], tok)
        if not affords:
            self.error(("action",))
        return ResourceDecl(rid, tuple(affords))

    def scope_prefix(self):
        """Optional ``name:`` prefix (role or agent scope)."""
        if self.tok.kind == "id" and self.peek().text == ":":
            tok = self.tok
            name = self.ident()
            self.note("scope", name, tok)
            self.i += 1
            return name
        return None

    def purpose(self) -> PurposeDecl:
        scope = self.scope_prefix()
        action = self.action_expr()
        self.expect("=>")
        f = self.formula()
        context = ""
        if self.accept("in"):
            context = self.ident("context id")
        return PurposeDecl(action, f, scope, context)

    def promote(self) -> PromotesRule:
        role = self.scope_prefix()
        action = self.atomic_action()
        self.expect("->")
        if self.accept("+"):
            polarity = "+"
        elif self.accept("-"):
            polarity = "-"
        else:
            self.error(("'+'", "'-'"))
        return PromotesRule(role, action, self.ident("value"), polarity)

    def counts_as(self) -> CountsAsRule:
        src = self.atomic_action()
        self.expect("=>")
        dst = self.atomic_action()
        context = ""
        if self.accept("in"):
            context = self.ident("context id")
        return CountsAsRule(src, dst, context)

    def norm(self) -> Norm:
        t = self.tok
        if not self.at("O", "F"):
            self.error(("'O'", "'F'"))
        self.i += 1
        self.expect("(")
        tok = self.tok
        role = self.ident("role")
        self.note("role", role, tok)
        self.expect(",")
        cond = self.condition()
        self.expect(",")
        action = self.action_expr()
        self.expect(")")
        sanction = None
        if self.accept("else"):
            sanction = self.ident("sanction")
        return Norm(t.text, role, cond, action, sanction)

    def strategy(self) -> Strategy:
        cond = self.condition()
        self.expect("=>")
        self.expect("DO")
        self.expect("(")
        group = self.group()
        self.expect(",")
        action = self.action_expr()
        self.expect(")")
        return Strategy(cond, group, action)

    def action_decl(self) -> ActionDecl:
        tok = self.tok
        symbol = self.ident("action")
        self.positions.setdefault(("decl", symbol), (tok.line, tok.column))
        params = self.args() if self.at("(") else ()
        pre = TRUE
        if self.accept("pre"):
            pre = self.condition()
        adds, dels = [], []
        if self.accept("effects"):
            while self.tok.kind == "id":
                if self.accept("not"):
                    dels.append(self.fact())
                else:
                    adds.append(self.fact())
        return ActionDecl(symbol, params, pre, tuple(adds), tuple(dels))

    def requirement(self) -> Requirement:
        tok = self.tok
        role = self.ident("role")
        self.note("group", role, tok)
        self.expect(":")
        caps, knows, common = [], [], []
        while self.at("cap", "knows", "common"):
            word = self.ident()
            if word == "cap":
                t = self.tok
                caps.append(self.ident("action"))
                self.note("action", caps[-1], t)
            elif word == "knows":
                knows.append(self.fact())
            else:
                common.append(self.fact())
        if not (caps or knows or common):
            self.error(("'cap'", "'knows'", "'common'"))
        return Requirement(role, tuple(caps), tuple(knows), tuple(common))

    # -------------------------------------------------------------- scenario

    def scenario_file(self) -> Scenario:
        if self.tok.kind == "eof":
            self.error(("'scenario'",), "empty document")
        self.expect("scenario")
        sid = self.ident("scenario id")
        self.expect("for")
        practice = self.ident("practice id")
        self.expect("{")
        f: dict = {"agents": [], "fills": []}
        while not self.accept("}"):
            word = self.tok.text if self.tok.kind == "id" else None
            if word == "agent":
                f["agents"].append(self.agent())
            elif word == "seed":
                self.i += 1
                f["seed"] = self.number("seed")
            elif word == "clock":
                self.i += 1
                f["clock"] = tuple(self.block(self.clock_entry))
            elif word == "resources":
                self.i += 1
                f["resources"] = tuple(self.block(self.instance))
            elif word == "facts":
                self.i += 1
                f["facts"] = tuple(self.block(self.fact))
            elif word == "public":
                self.i += 1
                f["public"] = tuple(self.block(self.fact))
            elif word == "fill":
                self.i += 1
                f["fills"].append(self.fill())
            else:
                self.error(("'agent'", "'seed'", "'clock'", "'resources'", "'facts'",
                            "'public'", "'fill'", "'}'"))
        if self.tok.kind != "eof":
            self.error(("end of input",))
        f["agents"] = tuple(f["agents"])
        f["fills"] = tuple(f["fills"])
        return Scenario(sid, practice, **f)

    def clock_entry(self) -> tuple:
        hour = self.ident("hour")
        self.expect("@")
        return (hour, self.number("tick"))

    def instance(self) -> tuple:
        inst = self.ident("resource instance")
        self.expect(":")
        return (inst, self.ident("resource"))

    def fill(self) -> Fill:
        f = self.formula()
        self.expect("with")
        action = self.atomic_action()
        self.expect("*")
        return Fill(f, action, self.number("count"))

    def agent(self) -> AgentDecl:
        self.expect("agent")
        tok = self.tok
        aid = self.ident("agent id")
        self.positions.setdefault(("agent", aid), (tok.line, tok.column))
        plays = []
        if self.accept("plays"):
            plays.append(self.ident("role"))
            while self.accept(","):
                plays.append(self.ident("role"))
        caps, beliefs, does = [], [], []
        violator = False
        if self.at("{"):
            def item():
                nonlocal violator
                word = self.ident()
                if word == "caps":
                    while self.tok.kind == "id":
                        caps.append(self.ident())
                        self.accept(",")
                elif word == "believes":
                    beliefs.append(self.fact())
                    while self.accept(","):
                        beliefs.append(self.fact())
                elif word == "violator":
                    violator = True
                elif word == "does":
                    does.append(self.atomic_action())
                else:
                    self.i -= 1
                    self.error(("'caps'", "'believes'", "'violator'", "'does'"))
            self.block(item)
        return AgentDecl(aid, tuple(plays), tuple(caps), tuple(beliefs), violator, tuple(does))


def parse_practice_syntax(text: str):
    """Parse without validation; returns ``(practice, positions)``."""
    p = Parser(text)
    return p.practice_file(), p.positions


def parse_scenario_syntax(text: str):
    p = Parser(text)
    return p.scenario_file(), p.positions


def parse_condition(text: str):
    p = Parser(text)
    c = p.condition()
    if p.tok.kind != "eof":
        p.error(("end of input",))
    return c


def parse_action(text: str):
    p = Parser(text)
    a = p.action_expr()
    if p.tok.kind != "eof":
        p.error(("end of input",))
    return a


def parse_pattern(text: str):
    p = Parser(text)
    a = p.pattern()
    if p.tok.kind != "eof":
        p.error(("end of input",))
    return a
