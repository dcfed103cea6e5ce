"""A small expression language for coefficient functions of x.

Grammar (whitespace ignored)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right-associative; "**" is accepted for "^"
    atom    := NUMBER | "x" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := exp | log | sin | cos | sqrt

``to_text`` prints a canonical form that parses back to the same tree.
``derivative`` differentiates symbolically with light constant folding.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

FUNCTIONS = {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt}
CONSTANTS = {"pi": math.pi, "e": math.e}

GRAMMAR_HELP = """\
Coefficient expressions are functions of x built from
  numbers (1, 2.5, 1e-3), the variable x, the constants pi and e,
  + - * / and ^ (or **, right-associative, binds tighter than unary minus),
  parentheses, and the functions exp, log, sin, cos, sqrt.
Examples: "exp(3*x)", "-2*exp(3*x)", "1 + x^2", "sqrt(2 - cos(pi*x))".
Boundary conditions read alpha1*phi(a) + alpha2*phi'(a) = 0 and
beta1*phi(b) + beta2*phi'(b) = 0, given as --bc alpha1,alpha2,beta1,beta2.
"""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(\*\*|[-+*/^()])|([A-Za-z_]\w*))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParameterError(f"unexpected character at {pos} in {text!r}")
        tok = m.group(1) or m.group(2) or m.group(3)
        out.append("^" if tok == "**" else tok)
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParameterError(f"expected {expected or 'a token'} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise ParameterError(f"trailing input {self.peek()!r} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            node = Bin(self.take(), node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            node = Bin(self.take(), node, self.unary())
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return Neg(self.unary())
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        if tok == "(":
            node = self.expr()
            self.take(")")
            return node
        if tok[0].isdigit() or tok[0] == ".":
            return Num(float(tok))
        if tok == "x":
            return Var()
        if tok in CONSTANTS:
            return Const(tok)
        if tok in FUNCTIONS:
            self.take("(")
            node = self.expr()
            self.take(")")
            return Call(tok, node)
        raise ParameterError(f"unknown name {tok!r} in {self.text!r}")


def parse(text: str):
    """Parse an expression into a tree."""
    if not isinstance(text, str) or not text.strip():
        raise ParameterError("empty expression")
    return _Parser(text).parse()


def evaluate(node, x):
    """Evaluate the tree at x (scalar or array)."""
    if isinstance(node, Num):
        return node.value + 0.0 * np.asarray(x, dtype=float)
    if isinstance(node, Var):
        return np.asarray(x, dtype=float)
    if isinstance(node, Const):
        return CONSTANTS[node.name] + 0.0 * np.asarray(x, dtype=float)
    if isinstance(node, Neg):
        return -evaluate(node.arg, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](evaluate(node.arg, x))
    a, b = evaluate(node.left, x), evaluate(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node) -> int:
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Num) and node.value < 0:
        return _PREC["neg"]
    return 5


def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(node) -> str:
    """Canonical text with the fewest parentheses that keep the tree intact."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return f"-({inner})" if _prec(node.arg) < _PREC["neg"] else f"-{inner}"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        # left-nested powers and negations need parentheses on the left
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) < p or (_prec(node.right) == p and node.op in "-/") \
            or (isinstance(node.right, Bin) and _prec(node.right) == p):
        right = f"({right})"
    return f"{left} {node.op} {right}" if p == 1 else f"{left}{node.op}{right}"


def _is_num(node, value=None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


def _add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    return Bin("+", a, b)


def _sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    return Bin("-", a, b)


def _mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    return Bin("*", a, b)


def _div(a, b):
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return Bin("/", a, b)


def _neg(a):
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _depends_on_x(node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, (Num, Const)):
        return False
    if isinstance(node, (Neg, Call)):
        return _depends_on_x(node.arg)
    return _depends_on_x(node.left) or _depends_on_x(node.right)


def derivative(node):
    """Symbolic d/dx of the tree."""
    if not _depends_on_x(node):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0)
    if isinstance(node, Neg):
        return _neg(derivative(node.arg))
    if isinstance(node, Call):
        u, du = node.arg, derivative(node.arg)
        outer = {
            "exp": lambda: node,
            "log": lambda: _div(Num(1.0), u),
            "sin": lambda: Call("cos", u),
            "cos": lambda: _neg(Call("sin", u)),
            "sqrt": lambda: _div(Num(0.5), node),
        }[node.func]()
        return _mul(outer, du)
    a, b = node.left, node.right
    da, db = derivative(a), derivative(b)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if node.op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), Bin("^", b, Num(2.0)))
    if not _depends_on_x(b):
        return _mul(_mul(b, Bin("^", a, _sub(b, Num(1.0)))), da)
    # a^b = exp(b log a)
    return _mul(node, _add(_mul(db, Call("log", a)), _mul(b, _div(da, a))))


class Expression:
    """Parsed expression usable as a vectorized function of x."""

    def __init__(self, text: str | object):
        self.tree = parse(text) if isinstance(text, str) else text
        self.text = to_text(self.tree)

    def __call__(self, x):
        return evaluate(self.tree, x)

    def derivative(self) -> "Expression":
        return Expression(derivative(self.tree))

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"
