"""Parsing for statements, relations, terms, and corpus files.

The concrete syntax is line oriented:

    thm <name> (<var>:<lo>..<hi>)* (<hypname>: <relation>)* : <relation>

with relations ``t = t``, ``t <= t``, ``t < t`` and terms built from
integer literals, identifiers, ``+ - * ^``, the ``neg`` prefix, and
parentheses.  ``*`` binds tighter than ``+``/``-``; ``neg`` binds tighter
than ``*``; ``^`` (whose exponent is a literal) binds tightest.  The
canonical renderer emits a fully parenthesized subset of this grammar, so
parse(render(x)) round-trips exactly.

Pattern variables ``?a`` are accepted only where a caller allows them
(rewrite-rule files).  ``#`` starts a comment.  Identifiers match
[a-z][a-z0-9_]*;  ``thm`` and ``neg`` are reserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import (
    DEFAULT_LIMITS,
    Hyp,
    LanguageError,
    Limits,
    Lit,
    Neg,
    PVar,
    Relation,
    Statement,
    Term,
    Var,
    VarDecl,
    validate_relation,
    validate_statement,
    validate_term,
)

RESERVED = ("thm", "neg")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<pvar>\?[a-z][a-z0-9_]*)
  | (?P<ident>[a-z][a-z0-9_]*)
  | (?P<int>-?[0-9]+)
  | (?P<sym><->|->|\.\.|<=|[()=<+\-*^:])
    """,
    re.VERBOSE,
)

_OPERAND_END = ("int", "ident", "pvar")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, first_line: int = 1) -> list[Token]:
    tokens: list[Token] = []
    line = first_line
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = str(m.lastgroup)
        value = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            line += value.count("\n")
            if "\n" in value:
                line_start = pos + value.rindex("\n") + 1
        elif kind == "comment":
            pass
        elif kind == "int" and value.startswith("-") and tokens and (
            tokens[-1].kind in _OPERAND_END or tokens[-1].text == ")"
        ):
            # After an operand, "-" is subtraction, not a sign.
            tokens.append(Token("sym", "-", line, col))
            tokens.append(Token("int", value[1:], line, col + 1))
        else:
            tokens.append(Token(kind, value, line, col))
        pos = m.end()
    tokens.append(Token("end", "", line, len(text) - line_start + 1))
    return tokens


class Parser:
    def __init__(self, tokens: list[Token], limits: Limits = DEFAULT_LIMITS):
        self.tokens = tokens
        self.pos = 0
        self.limits = limits

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    def take(self, kind: str | None = None, text: str | None = None, what: str | None = None) -> Token:
        tok = self.peek()
        expected = what or (repr(text) if text is not None else kind)
        if (kind is not None and tok.kind != kind) or (text is not None and tok.text != text):
            raise self.error(f"expected {expected}, found {tok.text or 'end of input'!r}")
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("sym", "ident")

    def take_ident(self, what: str) -> str:
        tok = self.take("ident", what=what)
        if tok.text in RESERVED:
            raise ParseError(f"{tok.text!r} is reserved", tok.line, tok.col)
        return tok.text

    def take_int(self) -> int:
        tok = self.take("int", what="integer")
        return int(tok.text)

    # --- terms -----------------------------------------------------------

    def parse_term(self, allow_patterns: bool = False) -> Term:
        return self._sum(allow_patterns)

    def _sum(self, ap: bool) -> Term:
        t = self._product(ap)
        while self.at("+") or self.at("-"):
            op = self.take("sym").text
            rhs = self._product(ap)
            t = Term("add" if op == "+" else "sub", (t, rhs))
        return t

    def _product(self, ap: bool) -> Term:
        t = self._unary(ap)
        while self.at("*"):
            self.take("sym")
            t = Term("mul", (t, self._unary(ap)))
        return t

    def _unary(self, ap: bool) -> Term:
        if self.peek().kind == "ident" and self.peek().text == "neg":
            self.take()
            return Neg(self._unary(ap))
        return self._power(ap)

    def _power(self, ap: bool) -> Term:
        t = self._atom(ap)
        while self.at("^"):
            self.take("sym")
            tok = self.peek()
            e = self.take_int()
            if e < 0:
                raise ParseError("exponent must be a natural number", tok.line, tok.col)
            t = Term("pow", (t,), e)
        return t

    def _atom(self, ap: bool) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            return Lit(int(tok.text))
        if tok.kind == "pvar":
            if not ap:
                raise self.error("pattern variable not allowed here")
            self.take()
            return PVar(tok.text[1:])
        if tok.kind == "ident":
            if tok.text in RESERVED:
                raise self.error(f"{tok.text!r} is reserved")
            self.take()
            return Var(tok.text)
        if self.at("("):
            self.take("sym")
            t = self.parse_term(ap)
            self.take("sym", ")")
            return t
        raise self.error("expected a term")

    # --- relations and statements ----------------------------------------

    def parse_relation(self, allow_patterns: bool = False) -> Relation:
        lhs = self.parse_term(allow_patterns)
        tok = self.peek()
        if tok.text == "=":
            kind = "eq"
        elif tok.text == "<=":
            kind = "le"
        elif tok.text == "<":
            kind = "lt"
        else:
            raise self.error("expected '=', '<=', or '<'")
        self.take("sym")
        rhs = self.parse_term(allow_patterns)
        return Relation(kind, lhs, rhs)

    def parse_statement(self) -> Statement:
        start = self.peek()
        self.take("ident", "thm")
        name = self.take_ident("statement name")
        vars_: list[VarDecl] = []
        hyps: list[Hyp] = []
        while self.at("("):
            self.take("sym")
            if self.at(")"):  # an explicitly empty group
                self.take("sym")
                continue
            ident = self.take_ident("variable or hypothesis name")
            self.take("sym", ":")
            if self.peek().kind == "int" and self.peek(1).text == "..":
                lo = self.take_int()
                self.take("sym", "..")
                hi = self.take_int()
                vars_.append(VarDecl(ident, lo, hi))
            else:
                hyps.append(Hyp(ident, self.parse_relation()))
            self.take("sym", ")")
        self.take("sym", ":")
        goal = self.parse_relation()
        stmt = Statement(name, tuple(vars_), tuple(hyps), goal)
        try:
            validate_statement(stmt, self.limits)
        except LanguageError as e:
            raise ParseError(str(e), start.line, start.col) from e
        return stmt

    def expect_end(self) -> None:
        if self.peek().kind != "end":
            raise self.error(f"unexpected trailing input {self.peek().text!r}")


def parse_statement(text: str, limits: Limits = DEFAULT_LIMITS, first_line: int = 1) -> Statement:
    p = Parser(tokenize(text, first_line), limits)
    stmt = p.parse_statement()
    p.expect_end()
    return stmt


def parse_relation(text: str, limits: Limits = DEFAULT_LIMITS, *, allow_patterns: bool = False) -> Relation:
    p = Parser(tokenize(text), limits)
    rel = p.parse_relation(allow_patterns)
    p.expect_end()
    validate_relation(rel, limits, allow_patterns=allow_patterns)
    return rel


def parse_term(text: str, limits: Limits = DEFAULT_LIMITS, *, allow_patterns: bool = False) -> Term:
    p = Parser(tokenize(text), limits)
    t = p.parse_term(allow_patterns)
    p.expect_end()
    validate_term(t, limits, allow_patterns=allow_patterns)
    return t


def parse_corpus(text: str, limits: Limits = DEFAULT_LIMITS) -> list[Statement]:
    """One statement per non-blank, non-comment line."""
    out: list[Statement] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append(parse_statement(raw, limits, first_line=lineno))
    return out


def load_corpus(path: str, limits: Limits = DEFAULT_LIMITS) -> list[Statement]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_corpus(fh.read(), limits)
