"""Polynomial expressions over Gaussian rationals.

Grammar (whitespace is insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/" | <juxtaposition>) unary)*
    unary   := ("+" | "-") unary | power
    power   := atom ("^" exponent)?
    exponent:= INT | "(" INT ")"
    atom    := INT | "i" | "hbar" | "ħ" | x<k> | y<k> | dx<k> | "(" expr ")"

``^`` binds tightest, so ``-x1^2`` is ``-(x1^2)``; ``p/q`` is a rational
literal by ordinary division.  Division is only allowed by nonzero
constants.  ``dx<k>`` factors multiply with the wedge product.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .scalar import Scalar
from .series import GradedSeries, unit_index

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownVariableError",
    "ExponentError",
    "DivisionError",
    "Expr",
    "parse_expr",
    "expr_to_series",
]


class ExprError(ValueError):
    def __init__(self, message: str, pos: int, src: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.src = src


class ExprSyntaxError(ExprError):
    pass


class UnknownVariableError(ExprError):
    pass


class ExponentError(ExprError):
    pass


class DivisionError(ExprError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?)|(?P<name>ħ|[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    out = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos, src)
        start = m.start(m.lastgroup)
        text = m.group(m.lastgroup)
        if m.lastgroup == "num" and "." in text:
            raise ExprSyntaxError("decimal literals are not exact; write p/q", start, src)
        out.append(_Tok(m.lastgroup, text, start))
        pos = m.end()
    out.append(_Tok("end", "", n))
    return out


# ---------------------------------------------------------------- tree


@dataclass(frozen=True)
class Expr:
    """Parse-tree node: ``op`` in {num, var, add, sub, mul, div, neg, pow}."""

    op: str
    args: tuple = ()
    value: object = None
    pos: int = 0

    def to_series(self, dim: int) -> GradedSeries:
        return expr_to_series(self, dim)

    def variables(self) -> set[str]:
        if self.op == "var":
            return {self.value}
        out = set()
        for a in self.args:
            out |= a.variables()
        return out


_VAR = re.compile(r"^(x|y|dx)([1-9]\d*)$")


def _check_name(tok: _Tok, dim: int | None, src: str) -> str:
    name = tok.text
    if name in ("i", "hbar", "ħ"):
        return "ħ" if name == "hbar" else name
    m = _VAR.match(name)
    if not m:
        raise UnknownVariableError(f"unknown variable {name!r}", tok.pos, src)
    if dim is not None and int(m.group(2)) > dim:
        raise UnknownVariableError(f"unknown variable {name!r} in dimension {dim}", tok.pos, src)
    return name


class _Parser:
    def __init__(self, src: str, dim: int | None):
        self.src = src
        self.dim = dim
        self.toks = _tokenize(src)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def eat(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.k += 1
            return True
        return False

    def expect(self, text: str):
        if not self.eat(text):
            self.fail(f"expected {text!r}")

    def fail(self, msg: str):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"{msg}, found {what}", t.pos, self.src)

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.tok.kind != "end":
            self.fail("unexpected token")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            t = self.tok
            if self.eat("+"):
                e = Expr("add", (e, self.term()), pos=t.pos)
            elif self.eat("-"):
                e = Expr("sub", (e, self.term()), pos=t.pos)
            else:
                return e

    def _starts_atom(self) -> bool:
        t = self.tok
        return t.kind in ("num", "name") or (t.kind == "op" and t.text == "(")

    def term(self) -> Expr:
        e = self.unary()
        while True:
            t = self.tok
            if self.eat("*"):
                e = Expr("mul", (e, self.unary()), pos=t.pos)
            elif self.eat("/"):
                e = Expr("div", (e, self.unary()), pos=t.pos)
            elif self._starts_atom():
                e = Expr("mul", (e, self.power()), pos=t.pos)
            else:
                return e

    def unary(self) -> Expr:
        t = self.tok
        if self.eat("-"):
            return Expr("neg", (self.unary(),), pos=t.pos)
        if self.eat("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        t = self.tok
        if self.eat("^"):
            et = self.tok
            paren = self.eat("(")
            neg = False
            if self.tok.kind == "op" and self.tok.text == "-":
                neg = True
                self.k += 1
            nt = self.tok
            if nt.kind != "num":
                raise ExponentError("exponent must be a non-negative integer literal", nt.pos, self.src)
            self.k += 1
            if neg:
                raise ExponentError("negative exponent", et.pos, self.src)
            if paren:
                self.expect(")")
            return Expr("pow", (base,), value=int(nt.text), pos=t.pos)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.k += 1
            return Expr("num", value=Scalar(int(t.text)), pos=t.pos)
        if t.kind == "name":
            self.k += 1
            name = _check_name(t, self.dim, self.src)
            if name == "i":
                return Expr("num", value=Scalar(0, 1), pos=t.pos)
            return Expr("var", value=name, pos=t.pos)
        if self.eat("("):
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected a number, variable or '('")


def parse_expr(src: str, dim: int | None = None) -> Expr:
    """Parse ``src``; with ``dim`` given, variables beyond it are rejected."""
    return _Parser(src, dim).parse()


def expr_to_series(e: Expr, dim: int) -> GradedSeries:
    """Exact expansion of an expression as a series (no truncation)."""
    op = e.op
    if op == "num":
        return GradedSeries.constant(dim, e.value)
    if op == "var":
        name = e.value
        if name == "ħ":
            return GradedSeries.monomial(dim, m=1)
        m = _VAR.match(name)
        kind, idx = m.group(1), int(m.group(2))
        if idx > dim:
            raise UnknownVariableError(f"unknown variable {name!r} in dimension {dim}", e.pos)
        if kind == "x":
            return GradedSeries.monomial(dim, alpha=unit_index(dim, idx))
        if kind == "y":
            return GradedSeries.monomial(dim, beta=unit_index(dim, idx))
        return GradedSeries.monomial(dim, J=(idx,))
    if op == "neg":
        return -expr_to_series(e.args[0], dim)
    if op == "pow":
        base = expr_to_series(e.args[0], dim)
        out = GradedSeries.constant(dim, 1)
        for _ in range(e.value):
            out = out * base
        return out
    a = expr_to_series(e.args[0], dim)
    b = expr_to_series(e.args[1], dim)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        terms = b.terms()
        if len(terms) != 1 or any(any(al) or any(be) or m or J for (al, be, m, J) in terms):
            raise DivisionError("division is only allowed by a nonzero constant", e.pos)
        return a.scale(Scalar(1) / next(iter(terms.values())))
    raise AssertionError(op)
