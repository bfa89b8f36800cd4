"""Arithmetic expressions in ``x1``, ``x2`` for coefficients and right-hand sides.

Grammar (``^`` binds tightest and is right-associative; unary minus sits
between ``^`` and ``* /``)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x1" | "x2" | "pi" | FUNC "(" expr ")" | "(" expr ")"

>>> evaluate(parse("2^3^2"), (0.0, 0.0))
512.0
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
VARIABLES = ("x1", "x2")


class ExprSyntaxError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class ExprEvalError(ArithmeticError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (subexpression at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    pos: int = field(default=0, compare=False)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self):
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary(), pos)
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp("^", base, self.unary(), pos)
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text), pos)
        if kind == "name":
            if text in VARIABLES:
                return Var(text, pos)
            if text == "pi":
                return Const("pi", pos)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg, pos)
            raise ExprSyntaxError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError(f"unexpected {text!r}", pos)


def parse(text):
    """Parse an expression; syntax errors carry a character offset."""
    p = _Parser(text)
    node = p.expr()
    kind, tok, pos = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"trailing input {tok!r}", pos)
    return node


def to_string(node):
    """Fully parenthesized text that reparses to the same tree shape."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_string(node.left)} {node.op} {to_string(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _eval(node, x1, x2):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x1 if node.name == "x1" else x2
    if isinstance(node, Const):
        return math.pi
    if isinstance(node, Neg):
        return -_eval(node.operand, x1, x2)
    if isinstance(node, Call):
        arg = _eval(node.arg, x1, x2)
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise ExprEvalError("sqrt of a negative number", node.pos)
        return FUNCTIONS[node.func](arg)
    left = _eval(node.left, x1, x2)
    right = _eval(node.right, x1, x2)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(np.asarray(right) == 0):
            raise ExprEvalError("division by zero", node.pos)
        return left / right
    with np.errstate(all="ignore"):
        out = np.power(np.asarray(left, dtype=float), right)
    if not np.all(np.isfinite(out)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right)):
        raise ExprEvalError("invalid power", node.pos)
    return out if np.ndim(out) else float(out)


def evaluate(node, p):
    """Evaluate at a single point ``p = (x1, x2)``."""
    return float(_eval(node, float(p[0]), float(p[1])))


class Expr:
    """A parsed expression usable as a vectorized field ``f(x1, x2)``."""

    def __init__(self, text):
        self.text = text
        self.tree = parse(text)

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = _eval(self.tree, x1, x2)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(x1, x2).shape).copy()

    def __repr__(self):
        return f"Expr({self.text!r})"
