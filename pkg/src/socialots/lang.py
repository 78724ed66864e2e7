"""Scenario scripts and invariant definitions: lexer, parser, printer, evaluator.

Predicates use a fixed vocabulary of atoms over the social network::

    visibility(a)               a in friends(b)         a in pending(b)
    a in accounts               a in likes(b, photos, 1)
    viewed-photo(owner, viewer, uid)                    viewed-friends(owner, viewer)
    myid(a) == b

combined with ``not`` > ``and`` > ``or`` > ``implies`` (right associative).
Comments run from ``--`` to the end of the line.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from . import social
from .kernel import Bounds, OtsError, observation_digest, to_jsonable
from .social import CONTENT, PLACEHOLDERS, ContentItem, SocialNetwork

PARAM_SORTS = ("account", "nat")

RESERVED = frozenset(
    {
        "scenario", "accounts", "step", "expect-stutter", "assert", "expect-violation",
        "implies", "or", "and", "not", "in", "friends", "pending", "likes", "visibility",
        "viewed-photo", "viewed-friends", "myid", "invariant", "lemma", "true", "false",
        *PLACEHOLDERS,
    }
)


# -- AST -----------------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class IdLit:
    name: str


@dataclass(frozen=True)
class NatLit:
    value: int


IdExpr = Union[Param, IdLit]
NatExpr = Union[Param, NatLit]


@dataclass(frozen=True)
class Visibility:
    owner: IdExpr


@dataclass(frozen=True)
class InFriends:
    who: IdExpr
    owner: IdExpr


@dataclass(frozen=True)
class InPending:
    who: IdExpr
    owner: IdExpr


@dataclass(frozen=True)
class InAccounts:
    who: IdExpr


@dataclass(frozen=True)
class InLikes:
    who: IdExpr
    owner: IdExpr
    place: str
    uid: NatExpr


@dataclass(frozen=True)
class ViewedPhoto:
    owner: IdExpr
    viewer: IdExpr
    photo: NatExpr


@dataclass(frozen=True)
class ViewedFriends:
    owner: IdExpr
    viewer: IdExpr


@dataclass(frozen=True)
class MyIdIs:
    owner: IdExpr
    who: IdExpr


@dataclass(frozen=True)
class Not:
    expr: "Pred"


@dataclass(frozen=True)
class And:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class Or:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class Implies:
    left: "Pred"
    right: "Pred"


ATOM_NAMES = ("visibility", "viewed-photo", "viewed-friends", "myid")
ATOMS = (Visibility, InFriends, InPending, InAccounts, InLikes, ViewedPhoto, ViewedFriends, MyIdIs)
Pred = Union[Not, And, Or, Implies, Visibility, InFriends, InPending, InAccounts, InLikes,
             ViewedPhoto, ViewedFriends, MyIdIs]


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    start: int
    end: int


@dataclass(frozen=True)
class InvariantDef:
    name: str
    params: tuple[tuple[str, str], ...]
    body: Pred
    kind: str = "invariant"

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)


@dataclass(frozen=True)
class LemmaDef(InvariantDef):
    kind: str = "lemma"


@dataclass(frozen=True)
class Call:
    transition: str
    args: tuple


@dataclass(frozen=True)
class Step:
    call: Call
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ExpectStutter:
    call: Call
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Assert:
    pred: Pred
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ExpectViolation:
    invariant: str
    span: Span | None = field(default=None, compare=False)


Statement = Union[Step, ExpectStutter, Assert, ExpectViolation]


@dataclass(frozen=True)
class ScenarioAst:
    name: str
    accounts: tuple[str, ...] | None
    statements: tuple[Statement, ...]


class ParseError(OtsError, ValueError):
    def __init__(self, message: str, span: Span, expected: Sequence[str] = ()):
        self.message = message
        self.span = span
        self.expected = tuple(expected)
        text = f"{span.line}:{span.column}: {message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        super().__init__(text)


# -- lexer ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<nat>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<sym>:=|==|[()\[\],=:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # id | nat | string | sym | eof
    text: str
    span: Span


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            span = Span(line, pos - line_start + 1, pos, pos + 1)
            raise ParseError(f"unexpected character {src[pos]!r}", span)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, Span(line, pos - line_start + 1, pos, m.end())))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, pos - line_start + 1, pos, pos)))
    return tokens


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


# -- parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0
        self.params: dict[str, str] | None = None

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, expected: Sequence[str] = (), tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(message, tok.span, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("id", "sym") and self.tok.text == text

    def take(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", [repr(text)])
        return self.take()

    def name(self, what: str) -> Token:
        tok = self.tok
        if tok.kind != "id" or tok.text in RESERVED:
            found = tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", [what])
        return self.take()

    # predicates

    def pred(self) -> Pred:
        left = self.or_expr()
        if self.at("implies"):
            self.take()
            return Implies(left, self.pred())
        return left

    def or_expr(self) -> Pred:
        left = self.and_expr()
        while self.at("or"):
            self.take()
            left = Or(left, self.and_expr())
        return left

    def and_expr(self) -> Pred:
        left = self.unary()
        while self.at("and"):
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Pred:
        if self.at("not"):
            self.take()
            return Not(self.unary())
        if self.at("("):
            self.take()
            inner = self.pred()
            self.expect(")")
            return inner
        return self.atom()

    def atom(self) -> Pred:
        tok = self.tok
        if self.at("visibility"):
            self.take()
            self.expect("(")
            owner = self.id_expr()
            self.expect(")")
            return Visibility(owner)
        if self.at("viewed-photo"):
            self.take()
            self.expect("(")
            owner = self.id_expr()
            self.expect(",")
            viewer = self.id_expr()
            self.expect(",")
            photo = self.nat_expr()
            self.expect(")")
            return ViewedPhoto(owner, viewer, photo)
        if self.at("viewed-friends"):
            self.take()
            self.expect("(")
            owner = self.id_expr()
            self.expect(",")
            viewer = self.id_expr()
            self.expect(")")
            return ViewedFriends(owner, viewer)
        if self.at("myid"):
            self.take()
            self.expect("(")
            owner = self.id_expr()
            self.expect(")")
            self.expect("==")
            return MyIdIs(owner, self.id_expr())
        if tok.kind == "id" and tok.text not in RESERVED and self.toks[self.i + 1].text == "(":
            near = difflib.get_close_matches(tok.text, ATOM_NAMES, n=1)
            hint = f"; did you mean {near[0]!r}?" if near else ""
            raise self.error(f"unknown atom {tok.text!r}{hint}", ATOM_NAMES)
        if tok.kind == "id" and tok.text not in RESERVED:
            who = self.id_expr()
            self.expect("in")
            if self.at("accounts"):
                self.take()
                return InAccounts(who)
            if self.at("friends") or self.at("pending"):
                which = self.take().text
                self.expect("(")
                owner = self.id_expr()
                self.expect(")")
                return InFriends(who, owner) if which == "friends" else InPending(who, owner)
            if self.at("likes"):
                self.take()
                self.expect("(")
                owner = self.id_expr()
                self.expect(",")
                place = self.placeholder()
                self.expect(",")
                uid = self.nat_expr()
                self.expect(")")
                return InLikes(who, owner, place, uid)
            found = self.tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", ["accounts", "friends(..)", "pending(..)", "likes(..)"])
        if tok.kind == "id":
            raise self.error(f"unknown atom {tok.text!r}", ["predicate"])
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", ["predicate"])

    def placeholder(self) -> str:
        if self.tok.kind == "id" and self.tok.text in PLACEHOLDERS:
            return self.take().text
        found = self.tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", PLACEHOLDERS)

    def id_expr(self) -> IdExpr:
        tok = self.name("account")
        if self.params is None:
            return IdLit(tok.text)
        sort = self.params.get(tok.text)
        if sort is None:
            raise self.error(f"undeclared parameter {tok.text!r}", tok=tok)
        if sort != "account":
            raise self.error(f"parameter {tok.text!r} has sort {sort}, expected account", tok=tok)
        return Param(tok.text)

    def nat_expr(self) -> NatExpr:
        tok = self.tok
        if tok.kind == "nat":
            self.take()
            return NatLit(int(tok.text))
        if self.params is not None and tok.kind == "id" and tok.text not in RESERVED:
            self.take()
            sort = self.params.get(tok.text)
            if sort is None:
                raise self.error(f"undeclared parameter {tok.text!r}", tok=tok)
            if sort != "nat":
                raise self.error(f"parameter {tok.text!r} has sort {sort}, expected nat", tok=tok)
            return Param(tok.text)
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", ["natural"])

    def end(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}", ["end of input"])

    # definitions

    def definitions(self) -> list[InvariantDef]:
        defs: list[InvariantDef] = []
        seen = set()
        while self.tok.kind != "eof":
            if not (self.at("invariant") or self.at("lemma")):
                found = self.tok.text
                raise self.error(f"unexpected {found!r}", ["invariant", "lemma"])
            kind = self.take().text
            name_tok = self.name("definition name")
            if name_tok.text in seen:
                raise self.error(f"duplicate definition {name_tok.text!r}", tok=name_tok)
            seen.add(name_tok.text)
            self.expect("(")
            params: list[tuple[str, str]] = []
            if not self.at(")"):
                while True:
                    p = self.name("parameter name")
                    if any(p.text == n for n, _ in params):
                        raise self.error(f"duplicate parameter {p.text!r}", tok=p)
                    self.expect(":")
                    s = self.tok
                    if s.kind != "id" or s.text not in PARAM_SORTS:
                        raise self.error(f"unknown sort {s.text!r}", PARAM_SORTS)
                    self.take()
                    params.append((p.text, s.text))
                    if not self.at(","):
                        break
                    self.take()
            self.expect(")")
            self.expect(":=")
            self.params = dict(params)
            body = self.pred()
            self.params = None
            cls = LemmaDef if kind == "lemma" else InvariantDef
            defs.append(cls(name_tok.text, tuple(params), body))
        return defs

    # scenarios

    def scenario(self) -> ScenarioAst:
        self.expect("scenario")
        if self.tok.kind != "string":
            raise self.error(f"unexpected {self.tok.text!r}", ["scenario name string"])
        name = _unquote(self.take().text)
        accounts = None
        if self.at("accounts"):
            self.take()
            self.expect("=")
            self.expect("[")
            ids = [self.name("account").text]
            while self.at(","):
                self.take()
                ids.append(self.name("account").text)
            self.expect("]")
            accounts = tuple(ids)
        stmts = []
        while self.tok.kind != "eof":
            start = self.tok
            if self.at("step"):
                self.take()
                stmts.append(Step(self.call(), span=self._span_from(start)))
            elif self.at("expect-stutter"):
                self.take()
                stmts.append(ExpectStutter(self.call(), span=self._span_from(start)))
            elif self.at("assert"):
                self.take()
                pred = self.pred()
                stmts.append(Assert(pred, span=self._span_from(start)))
            elif self.at("expect-violation"):
                self.take()
                inv = self.name("invariant name").text
                stmts.append(ExpectViolation(inv, span=self._span_from(start)))
            else:
                found = self.tok.text
                raise self.error(
                    f"unexpected {found!r}", ["step", "expect-stutter", "assert", "expect-violation"]
                )
        return ScenarioAst(name, accounts, tuple(stmts))

    def _span_from(self, start: Token) -> Span:
        last = self.toks[self.i - 1]
        return Span(start.span.line, start.span.column, start.span.start, last.span.end)

    def call(self) -> Call:
        tok = self.tok
        if tok.kind != "id" or tok.text in RESERVED:
            raise self.error(f"unexpected {tok.text or 'end of input'!r}", ["transition call"])
        sorts = CALL_SORTS.get(tok.text)
        if sorts is None:
            near = difflib.get_close_matches(tok.text, list(CALL_SORTS), n=1, cutoff=0.0)
            hint = f"; did you mean {near[0]!r}?" if near else ""
            raise self.error(f"unknown transition {tok.text!r}{hint}", list(CALL_SORTS))
        self.take()
        self.expect("(")
        raw: list = []
        if not self.at(")"):
            while True:
                if len(raw) >= len(sorts):
                    raise self.error(f"{tok.text} takes {len(sorts)} argument(s)", [")"])
                raw.append(self.arg(sorts[len(raw)]))
                if not self.at(","):
                    break
                self.take()
        if len(raw) != len(sorts):
            raise self.error(
                f"{tok.text} takes {len(sorts)} argument(s), got {len(raw)}", [", " + sorts[len(raw)]]
            )
        self.expect(")")
        return Call(tok.text, _group_args(tok.text, raw))

    def arg(self, sort: str):
        tok = self.tok
        if sort == "nat" and tok.kind == "nat":
            return int(self.take().text)
        if sort == "bool" and tok.kind == "id" and tok.text in ("true", "false"):
            return self.take().text == "true"
        if sort == "placeholder" and tok.kind == "id" and tok.text in PLACEHOLDERS:
            return self.take().text
        if sort == "payload" and tok.kind == "string" and len(tok.text) > 2:
            return _unquote(self.take().text)
        if sort in ("account", "payload") and tok.kind == "id" and tok.text not in RESERVED:
            return self.take().text
        raise self.error(f"unexpected {tok.text or 'end of input'!r}", [sort])


def _flat_sorts(params) -> list[str]:
    out = []
    for s in params:
        if s == CONTENT:
            out.extend(a.name for a in s.args)
        else:
            out.append(s.name)
    return out


_FULL = SocialNetwork(extensions=social.EXTENSIONS)
TRANSITION_PARAMS = {t.name: t.params for t in _FULL.signature.transitions}
CALL_SORTS = {name: _flat_sorts(params) for name, params in TRANSITION_PARAMS.items()}


def _group_args(name: str, flat: list) -> tuple:
    out, i = [], 0
    for s in TRANSITION_PARAMS[name]:
        if s == CONTENT:
            out.append(ContentItem(*flat[i : i + 3]))
            i += 3
        else:
            out.append(flat[i])
            i += 1
    return tuple(out)


def parse_predicate(src: str, declared_params: Iterable[tuple[str, str]] | None = None) -> Pred:
    """Parse one predicate.

    With ``declared_params`` (an invariant body) every bare name must be a
    declared parameter; without it (a scenario assertion) bare names are
    account literals.
    """
    p = _Parser(src)
    if declared_params is not None:
        p.params = dict(declared_params)
    pred = p.pred()
    p.end()
    return pred


def parse_invariant_file(src: str) -> list[InvariantDef]:
    return _Parser(src).definitions()


def parse_scenario(src: str) -> ScenarioAst:
    p = _Parser(src)
    sc = p.scenario()
    p.end()
    return sc


# -- printer -------------------------------------------------------------------


def _id(e: IdExpr) -> str:
    return e.name


def _nat(e: NatExpr) -> str:
    return e.name if isinstance(e, Param) else str(e.value)


_LEVEL = {Implies: 1, Or: 2, And: 3, Not: 4}


def print_predicate(p: Pred, level: int = 1) -> str:
    own = _LEVEL.get(type(p), 5)
    if isinstance(p, Implies):
        text = f"{print_predicate(p.left, 2)} implies {print_predicate(p.right, 1)}"
    elif isinstance(p, Or):
        text = f"{print_predicate(p.left, 2)} or {print_predicate(p.right, 3)}"
    elif isinstance(p, And):
        text = f"{print_predicate(p.left, 3)} and {print_predicate(p.right, 4)}"
    elif isinstance(p, Not):
        text = f"not {print_predicate(p.expr, 4)}"
    elif isinstance(p, Visibility):
        text = f"visibility({_id(p.owner)})"
    elif isinstance(p, InFriends):
        text = f"{_id(p.who)} in friends({_id(p.owner)})"
    elif isinstance(p, InPending):
        text = f"{_id(p.who)} in pending({_id(p.owner)})"
    elif isinstance(p, InAccounts):
        text = f"{_id(p.who)} in accounts"
    elif isinstance(p, InLikes):
        text = f"{_id(p.who)} in likes({_id(p.owner)}, {p.place}, {_nat(p.uid)})"
    elif isinstance(p, ViewedPhoto):
        text = f"viewed-photo({_id(p.owner)}, {_id(p.viewer)}, {_nat(p.photo)})"
    elif isinstance(p, ViewedFriends):
        text = f"viewed-friends({_id(p.owner)}, {_id(p.viewer)})"
    elif isinstance(p, MyIdIs):
        text = f"myid({_id(p.owner)}) == {_id(p.who)}"
    else:
        raise TypeError(f"not a predicate: {p!r}")
    return f"({text})" if own < level else text


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_call(call: Call) -> str:
    parts = []
    for sort, value in zip(TRANSITION_PARAMS[call.transition], call.args):
        if sort == CONTENT:
            author, uid, payload = value
            parts += [author, str(uid), _quote(payload)]
        elif sort.name == "bool":
            parts.append("true" if value else "false")
        else:
            parts.append(str(value))
    return f"{call.transition}({', '.join(parts)})"


def print_definition(d: InvariantDef) -> str:
    params = ", ".join(f"{n}: {s}" for n, s in d.params)
    return f"{d.kind} {d.name}({params}) :=\n  {print_predicate(d.body)}"


def print_statement(st: Statement) -> str:
    if isinstance(st, Step):
        return f"step {print_call(st.call)}"
    if isinstance(st, ExpectStutter):
        return f"expect-stutter {print_call(st.call)}"
    if isinstance(st, Assert):
        return f"assert {print_predicate(st.pred)}"
    return f"expect-violation {st.invariant}"


def print_canonical(ast) -> str:
    if isinstance(ast, ScenarioAst):
        lines = [f"scenario {_quote(ast.name)}"]
        if ast.accounts is not None:
            lines.append(f"accounts = [{', '.join(ast.accounts)}]")
        lines += [print_statement(st) for st in ast.statements]
        return "\n".join(lines) + "\n"
    if isinstance(ast, InvariantDef):
        return print_definition(ast) + "\n"
    if isinstance(ast, (list, tuple)):
        return "\n".join(print_definition(d) for d in ast) + "\n"
    return print_predicate(ast)


# -- evaluation ----------------------------------------------------------------


def _bind(e, env):
    if isinstance(e, Param):
        return env[e.name]
    if isinstance(e, IdLit):
        return e.name
    return e.value


def eval_predicate(p: Pred, s, env: dict | None = None, net: SocialNetwork | None = None) -> bool:
    """Evaluate ``p`` at network state ``s`` through the model's observers."""
    env = env or {}
    net = net or _DEFAULT_NET
    if isinstance(p, Implies):
        return (not eval_predicate(p.left, s, env, net)) or eval_predicate(p.right, s, env, net)
    if isinstance(p, Or):
        return eval_predicate(p.left, s, env, net) or eval_predicate(p.right, s, env, net)
    if isinstance(p, And):
        return eval_predicate(p.left, s, env, net) and eval_predicate(p.right, s, env, net)
    if isinstance(p, Not):
        return not eval_predicate(p.expr, s, env, net)
    if isinstance(p, InAccounts):
        return _bind(p.who, env) in s.installed
    owner = net.project(s, _bind(p.owner, env))
    prof = net.component
    if isinstance(p, Visibility):
        return prof.observe(owner, "visibility", ())
    if isinstance(p, InFriends):
        return _bind(p.who, env) in prof.observe(owner, "friends", ())
    if isinstance(p, InPending):
        return _bind(p.who, env) in prof.observe(owner, "pending", ())
    if isinstance(p, InLikes):
        return _bind(p.who, env) in prof.observe(owner, "likeset", (_bind(p.uid, env), p.place))
    if isinstance(p, ViewedPhoto):
        return prof.observe(owner, "viewed_photo", (_bind(p.viewer, env), _bind(p.photo, env)))
    if isinstance(p, ViewedFriends):
        return prof.observe(owner, "viewed_friends", (_bind(p.viewer, env),))
    if isinstance(p, MyIdIs):
        return prof.observe(owner, "myid", ()) == _bind(p.who, env)
    raise TypeError(f"not a predicate: {p!r}")


_DEFAULT_NET = SocialNetwork()


def atoms(p: Pred) -> Iterable[Pred]:
    if isinstance(p, (Implies, Or, And)):
        yield from atoms(p.left)
        yield from atoms(p.right)
    elif isinstance(p, Not):
        yield from atoms(p.expr)
    else:
        yield p


def substitute(p: Pred, env: dict) -> Pred:
    """Replace parameters by literals."""

    def ex(e):
        if isinstance(e, Param):
            v = env[e.name]
            return NatLit(v) if isinstance(v, int) else IdLit(v)
        return e

    if isinstance(p, (Implies, Or, And)):
        return type(p)(substitute(p.left, env), substitute(p.right, env))
    if isinstance(p, Not):
        return Not(substitute(p.expr, env))
    fields = {k: ex(v) for k, v in vars(p).items()}
    return type(p)(**fields)


# -- scenario execution --------------------------------------------------------


@dataclass
class TraceEntry:
    index: int
    statement: str
    ok: bool
    span: Span | None
    transition: str | None = None
    args: list | None = None
    applied: bool | None = None
    digest: str | None = None
    message: str = ""

    def to_json(self) -> dict:
        d = {
            "index": self.index,
            "statement": self.statement,
            "ok": self.ok,
            "line": self.span.line if self.span else None,
            "column": self.span.column if self.span else None,
        }
        if self.transition is not None:
            d.update(transition=self.transition, args=self.args, applied=self.applied)
        d["digest"] = self.digest
        if self.message:
            d["message"] = self.message
        return d


@dataclass
class TraceReport:
    name: str
    entries: list[TraceEntry]
    first_failure: int | None

    @property
    def passed(self) -> bool:
        return self.first_failure is None

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "scenario": self.name,
            "passed": self.passed,
            "first_failure": self.first_failure,
            "steps": [e.to_json() for e in self.entries],
        }

    def format(self) -> str:
        lines = [f"scenario {self.name!r}: {'PASS' if self.passed else 'FAIL'}"]
        for e in self.entries:
            mark = "ok  " if e.ok else "FAIL"
            extra = ""
            if e.applied is not None:
                extra = " [applied]" if e.applied else " [stutter]"
            where = f"{e.span.line}:{e.span.column}" if e.span else "-"
            lines.append(f"  {mark} {where:>6} {e.statement}{extra}")
            if e.message:
                lines.append(f"              {e.message}")
        return "\n".join(lines)


def scenario_bounds(sc: ScenarioAst) -> Bounds:
    ids, uids, payloads = [], [], []

    def add(xs, v):
        if v not in xs:
            xs.append(v)

    for st in sc.statements:
        if isinstance(st, (Step, ExpectStutter)):
            for sort, v in zip(TRANSITION_PARAMS[st.call.transition], st.call.args):
                if sort.name == "account":
                    add(ids, v)
                elif sort.name == "nat":
                    add(uids, v)
                elif sort == CONTENT:
                    add(ids, v[0])
                    add(uids, v[1])
                    add(payloads, v[2])
        elif isinstance(st, Assert):
            for a in atoms(st.pred):
                for v in vars(a).values():
                    if isinstance(v, IdLit):
                        add(ids, v.name)
                    elif isinstance(v, NatLit):
                        add(uids, v.value)
    accounts = sc.accounts if sc.accounts is not None else tuple(ids) or ("alice",)
    return social.social_bounds(
        accounts, tuple(uids) or (1,), tuple(payloads) or ("p",), PLACEHOLDERS, max_seq=8, max_set=8
    )


def run_scenario(
    sc: ScenarioAst,
    extensions: Iterable[str] = (),
    default_visibility: bool = True,
    invariants: dict | None = None,
) -> TraceReport:
    from .verifier import builtin_definitions, instantiations

    net = SocialNetwork(default_visibility, extensions)
    defs = dict(builtin_definitions())
    defs.update(invariants or {})
    b = scenario_bounds(sc)
    cache: dict = {}
    s = net.initial()
    entries: list[TraceEntry] = []
    first = None
    for i, st in enumerate(sc.statements):
        entry = TraceEntry(i, print_statement(st), True, st.span)
        if isinstance(st, (Step, ExpectStutter)):
            entry.transition = st.call.transition
            entry.args = to_jsonable(list(st.call.args))
            if not _known(net, st.call):
                entry.ok = False
                entry.message = f"transition {st.call.transition!r} needs the set-visibility extension"
            else:
                s, entry.applied = net.apply(s, st.call.transition, st.call.args)
                if isinstance(st, ExpectStutter) and entry.applied:
                    entry.ok, entry.message = False, "expected a stutter but the transition applied"
        elif isinstance(st, Assert):
            if not eval_predicate(st.pred, s, {}, net):
                entry.ok, entry.message = False, "assertion is false"
        else:
            d = defs.get(st.invariant)
            if d is None:
                entry.ok, entry.message = False, f"unknown invariant {st.invariant!r}"
            elif all(eval_predicate(d.body, s, env, net) for env in instantiations(d, b)):
                entry.ok, entry.message = False, f"{st.invariant} holds; expected a violation"
        entry.digest = observation_digest(net, s, b, cache)
        if not entry.ok and first is None:
            first = i
        entries.append(entry)
    return TraceReport(sc.name, entries, first)


def _known(net: SocialNetwork, call: Call) -> bool:
    try:
        net.transition_spec(call.transition)
    except social.ConfigError:
        return False
    return True
