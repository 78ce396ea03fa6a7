"""Reader and printer for the Prolog-like program syntax (see docs/syntax.md)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .terms import (
    Atom, Clause, Compound, Const, Int, Literal, Program, ProgramError, Subgoal,
    USTAR, UStar, Var, is_builtin,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected=()):
        if not message:
            raise ValueError("ParseError needs a message")
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = frozenset(expected)

    def __str__(self):
        text = f"{self.span.line}:{self.span.column}: {self.message}"
        if self.expected:
            text += " (expected " + ", ".join(sorted(self.expected)) + ")"
        return text


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<naf>\\\+)
  | (?P<int>[0-9]+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[(),.<+\-*])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    start: int
    end: int
    line: int
    column: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            span = SourceSpan(line, pos - line_start + 1, pos, pos + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        if kind != "ws":
            if kind == "punct":
                kind = m.group()
            elif kind == "name" and m.group() == "is":
                kind = "is"
            toks.append(_Tok(kind, m.group(), pos, m.end(), line, pos - line_start + 1))
        for i in range(pos, m.end()):
            if text[i] == "\n":
                line += 1
                line_start = i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", pos, pos, line, pos - line_start + 1))
    return toks


_DESCR = {"eof": "end of input", "name": "name", "var": "variable", "int": "integer",
          "neck": "':-'", "naf": "'\\+'", "is": "'is'"}


def _describe(kind: str) -> str:
    return _DESCR.get(kind, f"'{kind}'")


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _span(self, t: _Tok) -> SourceSpan:
        return SourceSpan(t.line, t.column, t.start, t.end)

    def fail(self, message: str, expected=(), tok: Optional[_Tok] = None):
        t = tok or self.tok
        raise ParseError(message, self._span(t), {_describe(k) for k in expected})

    def expect(self, *kinds: str) -> _Tok:
        t = self.tok
        if t.kind not in kinds:
            found = "end of input" if t.kind == "eof" else repr(t.text)
            self.fail(f"unexpected {found}", kinds)
        self.i += 1
        return t

    def at(self, *kinds: str) -> bool:
        return self.tok.kind in kinds

    # terms

    def expr(self):
        left = self.product()
        while self.at("+", "-"):
            op = self.expect("+", "-").text
            left = Compound(op, [left, self.product()])
        return left

    def product(self):
        left = self.factor()
        while self.at("*"):
            self.expect("*")
            left = Compound("*", [left, self.factor()])
        return left

    def factor(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return Int(int(t.text))
        if t.kind == "-" and self.toks[self.i + 1].kind == "int":
            self.i += 1
            return Int(-int(self.expect("int").text))
        if t.kind == "var":
            self.i += 1
            return Var(t.text)
        if t.kind == "name":
            self.i += 1
            if self.at("("):
                return Compound(t.text, self.args())
            return Const(t.text)
        if t.kind == "(":
            self.i += 1
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail("expected a term", ("int", "var", "name", "("))

    def args(self) -> list:
        self.expect("(")
        out = [self.expr()]
        while self.at(","):
            self.i += 1
            out.append(self.expr())
        self.expect(")")
        return out

    # atoms and literals

    def atom(self, allow_infix: bool = True) -> Atom:
        start = self.tok
        if allow_infix:
            left = self.expr()
            if self.at("is"):
                self.i += 1
                return Atom("is", [left, self.expr()])
            if self.at("<"):
                self.i += 1
                return Atom("<", [left, self.expr()])
            return self._to_atom(left, start)
        name = self.expect("name")
        if self.at("("):
            return Atom(name.text, self.args())
        return Atom(name.text)

    def _to_atom(self, t, start: _Tok) -> Atom:
        if type(t) is Const:
            return Atom(t.name)
        if type(t) is Compound and t.functor not in ("+", "-", "*"):
            return Atom(t.functor, t.args)
        self.fail("expected an atom", ("name", "is", "<"), tok=start)

    def literal(self) -> Literal:
        if self.at("naf"):
            self.i += 1
            return Literal(self.atom(), positive=False)
        return Literal(self.atom(), positive=True)

    def clause(self) -> Clause:
        start = self.tok
        if start.kind != "name":
            self.fail("clause head must be an atom", ("name",))
        head = self.atom(allow_infix=False)
        if is_builtin(head):
            self.fail(f"cannot define builtin {head.pred}/{head.arity}", tok=start)
        body = []
        if self.at("neck"):
            self.i += 1
            body.append(self.literal())
            while self.at(","):
                self.i += 1
                body.append(self.literal())
        if not self.at("."):
            found = "end of input" if self.at("eof") else repr(self.tok.text)
            self.fail(f"unexpected {found}", (".", ",") if body else (".", "neck"))
        self.i += 1
        return Clause(head, body)

    def program(self) -> Program:
        clauses = []
        first = self.tok
        while not self.at("eof"):
            clauses.append(self.clause())
        try:
            return Program(clauses)
        except ProgramError as e:
            raise ParseError(str(e), self._span(first)) from None


def parse_program(text: str) -> Program:
    """Parse clauses in textual order; raises ParseError."""
    return _Parser(text).program()


def parse_query(text: str) -> Atom:
    """Parse a top goal: exactly one positive, non-builtin atom."""
    p = _Parser(text)
    start = p.tok
    if p.at("eof"):
        p.fail("empty query", ("name",))
    if p.at("naf"):
        p.fail("top goal must be a single atom", tok=start)
    atom = p.atom()
    if is_builtin(atom):
        p.fail("top goal must not be a builtin", tok=start)
    if p.at(","):
        p.fail("top goal must be a single atom", tok=p.tok)
    if p.at("."):
        p.i += 1
    p.expect("eof")
    return atom


def parse_term(text: str):
    p = _Parser(text)
    t = p.expr()
    p.expect("eof")
    return t


# --- rendering --------------------------------------------------------------

_PREC = {"+": 500, "-": 500, "*": 400}


def _render_term(t, limit: int = 999) -> str:
    tt = type(t)
    if tt is Var:
        return t.name if t.index == 0 else f"{t.name}_{t.index}"
    if tt is Const:
        return t.name
    if tt is Int:
        return str(t.value)
    if t.functor in _PREC and len(t.args) == 2:
        p = _PREC[t.functor]
        left = _render_term(t.args[0], p)
        right = _render_term(t.args[1], p - 1)
        if right.startswith("-"):
            right = " " + right
        text = f"{left}{t.functor}{right}"
        return f"({text})" if p > limit else text
    return f"{t.functor}(" + ",".join(_render_term(a) for a in t.args) + ")"


def _render_atom(a: Atom) -> str:
    if a.pred == "is" and len(a.args) == 2:
        return f"{_render_term(a.args[0])} is {_render_term(a.args[1])}"
    if a.pred == "<" and len(a.args) == 2:
        return f"{_render_term(a.args[0])} < {_render_term(a.args[1])}"
    if not a.args:
        return a.pred
    return f"{a.pred}(" + ",".join(_render_term(t) for t in a.args) + ")"


def render(x) -> str:
    """Text form of a term, atom, literal, clause, goal or program."""
    tx = type(x)
    if tx is Atom:
        return _render_atom(x)
    if tx is Literal:
        return _render_atom(x.atom) if x.positive else "\\+ " + _render_atom(x.atom)
    if tx is UStar:
        return "u*"
    if tx is Subgoal:
        return render(x.literal)
    if tx is Clause:
        head = _render_atom(x.head)
        if not x.body:
            return head + "."
        return head + " :- " + ", ".join(render(l) for l in x.body) + "."
    if isinstance(x, Program):
        return "".join(render(c) + "\n" for c in x.clauses)
    if isinstance(x, tuple):
        return ", ".join(render(i) for i in x if type(i) is Subgoal or type(i) in (Literal, UStar))
    return _render_term(x)


__all__ = ["SourceSpan", "ParseError", "parse_program", "parse_query", "parse_term",
           "render", "USTAR"]
