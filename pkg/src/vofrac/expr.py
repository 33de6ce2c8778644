"""Tiny expression language for f(t) and d(t) given on the command line.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('+'|'-') factor | base ('^' factor)?
    base   := number | 't' | 'x' | func '(' expr ')' | '(' expr ')'
    func   := 'exp' | 'sin' | 'cos' | 'ln' | 'abs'

'^' is right-associative and binds tighter than unary minus, so
``-t^2`` is ``-(t^2)``. Trees evaluate elementwise on numpy arrays.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError

__all__ = ["Expr", "parse_expression", "VARIABLES", "FUNCTIONS"]

VARIABLES = ("t", "x")
FUNCTIONS = ("exp", "sin", "cos", "ln", "abs")

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPERAND_START = ("number", "t", "x", "(", "+", "-") + FUNCTIONS


def _ln(v):
    if np.any(v <= 0):
        raise DomainError("ln of non-positive argument")
    return np.log(v)


_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "ln": _ln, "abs": np.abs}


def _power(base, expo):
    out = np.power(base, expo)
    bad = np.isnan(out) & ~np.isnan(base) & ~np.isnan(expo)
    if np.any(bad):
        raise DomainError("non-integer power of a negative base")
    return out


_BINOPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": _power,
}


@dataclass(frozen=True)
class Expr:
    """Immutable expression tree node.

    ``op`` is one of ``num``, ``var``, ``neg``, a binary operator symbol,
    or a function name; ``args`` holds children (or the literal payload).
    """

    op: str
    args: tuple
    source: str = ""

    def evaluate(self, env):
        with np.errstate(all="ignore"):
            return self._eval(env)

    def _eval(self, env):
        op = self.op
        if op == "num":
            return self.args[0]
        if op == "var":
            return env[self.args[0]]
        if op == "neg":
            return np.negative(self.args[0]._eval(env))
        if op in _BINOPS:
            return _BINOPS[op](self.args[0]._eval(env), self.args[1]._eval(env))
        return _FUNCS[op](self.args[0]._eval(env))

    def variables(self):
        if self.op == "var":
            return {self.args[0]}
        if self.op == "num":
            return set()
        out = set()
        for child in self.args:
            out |= child.variables()
        return out

    def is_constant(self):
        return not self.variables()

    def __call__(self, t=0.0, x=0.0):
        return self.evaluate({"t": np.asarray(t, dtype=float), "x": np.asarray(x, dtype=float)})

    def __str__(self):
        return self.source or self.op


def _tokenize(src):
    tokens = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER.match(src, i)
        if m:
            tokens.append(("number", float(m.group()), i))
            i = m.end()
            continue
        m = _NAME.match(src, i)
        if m:
            name = m.group()
            if name not in VARIABLES and name not in FUNCTIONS:
                raise ParseError(f"unknown name {name!r}", i, _OPERAND_START)
            tokens.append((name, name, i))
            i = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i, _OPERAND_START)
    tokens.append(("end", None, len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    @property
    def kind(self):
        return self.tokens[self.pos][0]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        kind, _, offset = self.tokens[self.pos]
        what = "end of input" if kind == "end" else f"token {kind!r}"
        raise ParseError(f"unexpected {what}", offset, expected)

    def parse(self):
        node = self.expr()
        if self.kind != "end":
            self.fail(("+", "-", "*", "/", "^", "end"))
        return node

    def expr(self):
        node = self.term()
        while self.kind in ("+", "-"):
            op = self.advance()[0]
            node = Expr(op, (node, self.term()))
        return node

    def term(self):
        node = self.factor()
        while self.kind in ("*", "/"):
            op = self.advance()[0]
            node = Expr(op, (node, self.factor()))
        return node

    def factor(self):
        if self.kind == "-":
            self.advance()
            return Expr("neg", (self.factor(),))
        if self.kind == "+":
            self.advance()
            return self.factor()
        node = self.base()
        if self.kind == "^":
            self.advance()
            node = Expr("^", (node, self.factor()))
        return node

    def base(self):
        kind = self.kind
        if kind == "number":
            return Expr("num", (self.advance()[1],))
        if kind in VARIABLES:
            return Expr("var", (self.advance()[1],))
        if kind in FUNCTIONS:
            self.advance()
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Expr(kind, (arg,))
        if kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(_OPERAND_START)

    def expect(self, kind):
        if self.kind != kind:
            self.fail((kind,))
        self.advance()


def parse_expression(src: str) -> Expr:
    """Parse ``src`` into an evaluable :class:`Expr`.

    >>> float(parse_expression("t^2 + 3*t")(t=2.0))
    10.0
    """
    node = _Parser(src).parse()
    return Expr(node.op, node.args, src)
