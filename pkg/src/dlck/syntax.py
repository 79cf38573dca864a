"""Concrete syntax for formulas.

Grammar, loosest binding first::

    iff   := imp ['<->' imp]
    imp   := or ['->' imp]                 right associative
    or    := and ['|' or]
    and   := unary ['&' and]
    unary := '~' unary
           | 'K' INT unary
           | 'E' ['^' INT] group unary
           | 'C' group unary
           | '[' event ']' ['^' INT] unary
           | atom | '(' iff ')'
    atom  := 'mu' INT | 'lambda' INT | 'eps' INT | 'TRUE' | 'FALSE'
           | '@' NAME | '?' NAME
    event := '*' | '.' | '¤' | NAME
    group := '{' INT {',' INT} '}'

``@name`` is a physical proposition letter, ``?name`` a non-physical one.
``<->``, ``[*]^k`` and ``E^n`` are expanded while parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from dlck.core import (
    FALSE,
    POINT,
    STAR,
    TRUE,
    And,
    Bot,
    Box,
    C,
    E,
    Eps,
    EventSym,
    Formula,
    Group,
    Imp,
    K,
    Lam,
    Mu,
    Not,
    Or,
    Prop,
    Top,
    iff,
    iter_box,
    iter_E,
)


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        self.message = message
        super().__init__(f"{message} at column {pos + 1}: {text!r}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op><->|->|[~&|(){},^\[\]]|¬|∧|∨|→|↔)
  | (?P<int>\d+)
  | (?P<sym>[@?][A-Za-z_][A-Za-z0-9_]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ev>[*.¤])
    """,
    re.VERBOSE,
)

_UNICODE = {"¬": "~", "∧": "&", "∨": "|", "→": "->", "↔": "<->"}


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "op":
                value = _UNICODE.get(value, value)
            out.append(Token(kind, value, pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, events: dict[str, EventSym] | None = None,
                 table: dict[Formula, Formula] | None = None):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.events = events or {}
        self.table = {} if table is None else table

    def share(self, f: Formula) -> Formula:
        # hash-consing: structurally equal nodes become one object
        return self.table.setdefault(f, f)

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.text, self.tok.pos)

    def accept(self, value: str) -> bool:
        if self.tok.kind in ("op", "ev") and self.tok.value == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> None:
        if not self.accept(value):
            found = self.tok.value or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}")

    def integer(self) -> int:
        if self.tok.kind != "int":
            raise self.error("expected a natural number")
        value = int(self.tok.value)
        self.i += 1
        return value

    def parse(self) -> Formula:
        f = self.iff()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.value!r}")
        return f

    def iff(self) -> Formula:
        left = self.imp()
        if self.accept("<->"):
            return self.share(iff(left, self.imp()))
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.accept("->"):
            return self.share(Imp(left, self.imp()))
        return left

    def disj(self) -> Formula:
        left = self.conj()
        if self.accept("|"):
            return self.share(Or(left, self.disj()))
        return left

    def conj(self) -> Formula:
        left = self.unary()
        if self.accept("&"):
            return self.share(And(left, self.conj()))
        return left

    def power(self) -> int:
        return self.integer() if self.accept("^") else 1

    def group(self) -> Group:
        start = self.tok.pos
        self.expect("{")
        ids = [self.integer()]
        while self.accept(","):
            ids.append(self.integer())
        self.expect("}")
        if len(set(ids)) != len(ids):
            raise ParseError("repeated agent in group", self.text, start)
        return Group.of(*ids)

    def event(self) -> EventSym:
        tok = self.tok
        if tok.kind == "ev":
            self.i += 1
            return STAR if tok.value == "*" else POINT
        if tok.kind == "word":
            self.i += 1
            return self.events.get(tok.value, EventSym(tok.value))
        raise self.error("expected an event")

    def unary(self) -> Formula:
        return self.share(self._unary())

    def _unary(self) -> Formula:
        tok = self.tok
        if self.accept("~"):
            return Not(self.unary())
        if self.accept("("):
            f = self.iff()
            self.expect(")")
            return f
        if self.accept("["):
            ev = self.event()
            self.expect("]")
            k = self.power()
            return iter_box(ev, k, self.unary())
        if tok.kind == "sym":
            self.i += 1
            return Prop(tok.value[1:], tok.value[0] == "@")
        if tok.kind != "word":
            raise self.error(f"unexpected {tok.value or 'end of input'!r}")
        self.i += 1
        word = tok.value
        if word == "TRUE":
            return TRUE
        if word == "FALSE":
            return FALSE
        if word == "mu":
            return Mu(self.integer())
        if word == "lambda":
            return Lam(self.integer())
        if word == "eps":
            return Eps(self.integer())
        if word == "K":
            agent = self.integer()
            return K(agent, self.unary())
        if word == "E":
            n = self.power()
            g = self.group()
            return iter_E(g, n, self.unary())
        if word == "C":
            g = self.group()
            return C(g, self.unary())
        self.i -= 1
        raise self.error(f"unknown word {word!r}")


def parse_formula(text: str, events: dict[str, EventSym] | None = None,
                  table: dict[Formula, Formula] | None = None) -> Formula:
    """Parse ``text``; ``events`` resolves named events beyond ``*`` and ``.``.

    Passing the same ``table`` across calls shares equal subformulas.
    """
    return _Parser(text, events, table).parse()


# Printer precedence levels; higher binds tighter.
_IMP, _OR, _AND, _UNARY = 1, 2, 3, 4


def _event_text(ev: EventSym) -> str:
    if ev == STAR:
        return "*"
    if ev == POINT:
        return "."
    return ev.name


def _level(f: Formula) -> int:
    if isinstance(f, Imp):
        return _IMP
    if isinstance(f, Or):
        return _OR
    if isinstance(f, And):
        return _AND
    return _UNARY


def _show(f: Formula, need: int) -> str:
    text = _render(f)
    return f"({text})" if _level(f) < need else text


def _render(f: Formula) -> str:
    if isinstance(f, Top):
        return "TRUE"
    if isinstance(f, Bot):
        return "FALSE"
    if isinstance(f, Mu):
        return f"mu {f.child}"
    if isinstance(f, Lam):
        return f"lambda {f.j}"
    if isinstance(f, Eps):
        return f"eps {f.j}"
    if isinstance(f, Prop):
        return ("@" if f.is_physical else "?") + f.name
    if isinstance(f, Imp):
        return f"{_show(f.left, _OR)} -> {_show(f.right, _IMP)}"
    if isinstance(f, Or):
        return f"{_show(f.left, _AND)} | {_show(f.right, _OR)}"
    if isinstance(f, And):
        return f"{_show(f.left, _UNARY)} & {_show(f.right, _AND)}"
    if isinstance(f, Not):
        return "~" + _show(f.body, _UNARY)
    if isinstance(f, K):
        return f"K {f.agent} {_show(f.body, _UNARY)}"
    if isinstance(f, C):
        return f"C {f.group} {_show(f.body, _UNARY)}"
    if isinstance(f, E):
        n, body = 0, f
        while isinstance(body, E) and body.group == f.group:
            n, body = n + 1, body.body
        power = f"^{n}" if n > 1 else ""
        return f"E{power} {f.group} {_show(body, _UNARY)}"
    if isinstance(f, Box):
        n, body = 0, f
        while isinstance(body, Box) and body.event == f.event:
            n, body = n + 1, body.body
        power = f"^{n}" if n > 1 else ""
        return f"[{_event_text(f.event)}]{power} {_show(body, _UNARY)}"
    raise TypeError(f"not a formula: {f!r}")


def print_formula(f: Formula) -> str:
    return _render(f)
