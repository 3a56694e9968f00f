"""Tiny expression language for conformal factors and perturbations.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '·') unary)*
    unary  := ('-' | '+') unary | atom
    atom   := NUMBER | 'pi' | 'x1'..'x4' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'cos' | 'sin' | 'exp'

Numbers may be followed directly by an atom (``2pi``, ``0.2cos(...)``), which
reads as multiplication. ``π`` and subscript digits (``x₁``) are accepted.
Nothing else is evaluated.
"""
from __future__ import annotations

import math
import re

import numpy as np

from .confgrid import coordinates

FUNCS = {"cos": np.cos, "sin": np.sin, "exp": np.exp}

_TOKEN = re.compile(
    r"(?:(?P<num>\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>π|[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*()·]))"
)


class ExpressionError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at column {pos + 1}: {text!r}")
        self.pos = pos


_SUBSCRIPTS = str.maketrans("₁₂₃₄", "1234")


def _tokenize(text: str):
    text = text.translate(_SUBSCRIPTS)
    pos, out = 0, []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionError("unexpected character", text, pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ExpressionError(f"expected {value!r}", self.text, pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {val!r}", self.text, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if val in ("*", "·"):
                self.take()
                node = ("*", node, self.unary())
            elif kind in ("num", "name") or val == "(":
                # implicit product: 2pi, 0.2cos(...), 2(x1)
                node = ("*", node, self.unary())
            else:
                return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return ("num", float(val))
        if kind == "name":
            if val in ("pi", "π"):
                return ("num", math.pi)
            if val in ("x1", "x2", "x3", "x4"):
                return ("var", int(val[1]) - 1)
            if val in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", val, arg)
            raise ExpressionError(f"unknown name {val!r}", self.text, pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExpressionError("unexpected end of expression", self.text, pos)
        raise ExpressionError(f"unexpected {val!r}", self.text, pos)


def _eval(node, x):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return x[node[1]]
    if tag == "neg":
        return -_eval(node[1], x)
    if tag == "call":
        return FUNCS[node[1]](_eval(node[2], x))
    a, b = _eval(node[1], x), _eval(node[2], x)
    if tag == "+":
        return a + b
    if tag == "-":
        return a - b
    return a * b


def parse(text: str):
    """Parse ``text`` and return a callable ``fn(x1, x2, x3, x4)``."""
    if not isinstance(text, str):
        text = repr(text)
    tree = _Parser(text).parse()

    def fn(*x):
        return _eval(tree, x)

    fn.source = text
    return fn


def evaluate(text, n: int) -> np.ndarray:
    """Evaluate an expression (or a plain number) on the ``n^4`` unit lattice."""
    if isinstance(text, (int, float)):
        return np.full((n,) * 4, float(text))
    x = coordinates(n)
    return np.broadcast_to(np.asarray(parse(text)(*x), dtype=np.float64), (n,) * 4).copy()
