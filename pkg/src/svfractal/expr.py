"""A small expression language in one variable ``t``.

Grammar (highest precedence last)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right-associative
    primary := NUMBER | 't' | 'pi' | FUNC '(' expr ')' | '(' expr ')'

FUNC is one of sin, cos, exp, abs, sqrt.  Number literals are never negative
in a parsed tree; a leading minus is always a :class:`Neg` node.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprSyntaxError, NonFiniteResult, UnknownIdentifier

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "sqrt": np.sqrt,
}
CONSTANTS = {"pi": math.pi}
VARIABLE = "t"


class Expr:
    def __call__(self, t):
        return evaluate(self, t)

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str = VARIABLE


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div, "^": Pow}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(offset, f"unexpected character {text[offset]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind != "op":
            raise ExprSyntaxError(off, f"expected {value!r}")

    def parse(self) -> Expr:
        node = self.expr()
        kind, _, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(off, "trailing input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = _BINARY[op](node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = _BINARY[op](node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.unary())
        return base

    def primary(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == VARIABLE:
                return Var()
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise UnknownIdentifier(val, off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(off, "expected a number, 't', a function or '('")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with the byte offset of the offending
    token) or :class:`UnknownIdentifier`.
    """
    return _Parser(text).parse()


def _eval(e: Expr, t):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return t
    if isinstance(e, Neg):
        return -_eval(e.arg, t)
    if isinstance(e, Add):
        return _eval(e.left, t) + _eval(e.right, t)
    if isinstance(e, Sub):
        return _eval(e.left, t) - _eval(e.right, t)
    if isinstance(e, Mul):
        return _eval(e.left, t) * _eval(e.right, t)
    if isinstance(e, Div):
        return np.divide(_eval(e.left, t), _eval(e.right, t))
    if isinstance(e, Pow):
        return np.power(_eval(e.left, t), _eval(e.right, t))
    if isinstance(e, Call):
        return FUNCTIONS[e.func](_eval(e.arg, t))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, t):
    """Evaluate ``e`` at a scalar or array ``t``; any non-finite value is an error."""
    scalar = np.ndim(t) == 0
    arr = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        out = np.asarray(_eval(e, arr), dtype=float)
    out = np.broadcast_to(out, arr.shape)
    if not np.all(np.isfinite(out)):
        bad = arr[~np.isfinite(out)] if arr.ndim else arr
        raise NonFiniteResult(f"{to_string(e)} is not finite at t={np.ravel(bad)[0]!r}")
    return float(out) if scalar else np.array(out)


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}


def _prec(e: Expr) -> int:
    if isinstance(e, Num) and e.value < 0:
        return 0
    return _PREC.get(type(e), 5)


def _wrap(e: Expr, need_parens: bool) -> str:
    s = to_string(e)
    return f"({s})" if need_parens else s


def to_string(e: Expr) -> str:
    """Render ``e`` with the minimal parentheses needed to parse back to ``e``."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _prec(e.arg) < 3)
    if isinstance(e, Pow):
        return f"{_wrap(e.left, _prec(e.left) <= 4)}^{_wrap(e.right, _prec(e.right) < 3)}"
    p = _PREC[type(e)]
    left = _wrap(e.left, _prec(e.left) < p)
    right = _wrap(e.right, _prec(e.right) <= p)
    return f"{left}{_SYMBOL[type(e)]}{right}"
