"""Recursive-descent parser and evaluator for scalar nonlinearity expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | VARIABLE | fn '(' expr ')' | '(' expr ')' | '-' base

Binary operators are left-associative except ``^``.  Evaluation works on
floats and numpy arrays alike.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionSyntaxError

__all__ = ["Const", "Var", "Unary", "Binary", "parse_expression", "evaluate", "to_text"]

FUNCTIONS = {
    "abs": np.abs,
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or a function name
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[offset]!r}", offset)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables

    @property
    def tok(self):
        return self.tokens[self.i]

    def _take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, value):
        kind, val, pos = self.tok
        if val != value or kind != "op":
            raise ExpressionSyntaxError(f"expected {value!r}", pos)
        self.i += 1

    def parse(self):
        node = self.expr()
        kind, val, pos = self.tok
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self._take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self._take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self._take()
            node = Binary("^", node, self.factor())
        return node

    def base(self):
        kind, val, pos = self.tok
        if kind == "num":
            self._take()
            return Const(float(val))
        if kind == "name":
            self._take()
            if val in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Unary(val, arg)
            if val in self.variables:
                return Var(val)
            raise ExpressionSyntaxError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            self._take()
            node = self.expr()
            self._expect(")")
            return node
        if kind == "op" and val == "-":
            self._take()
            return Unary("neg", self.base())
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", pos)
        raise ExpressionSyntaxError(f"unexpected token {val!r}", pos)


def parse_expression(text, variables=("sigma",)):
    """Parse `text` into an expression tree.

    Raises `ExpressionSyntaxError` carrying the character offset of the
    offending token.
    """
    return _Parser(text, tuple(variables)).parse()


def evaluate(node, **env):
    """Evaluate a tree; variables are passed as keyword arguments."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Unary):
        arg = evaluate(node.arg, **env)
        if node.op == "neg":
            return -arg
        return FUNCTIONS[node.op](arg)
    left = evaluate(node.left, **env)
    right = evaluate(node.right, **env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(np.asarray(right) == 0):
            raise ZeroDivisionError("division by zero in expression")
        return left / right
    return np.power(left, right)


def to_text(node):
    """Render a tree back to fully parenthesised source text."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_text(node.arg)})"
        return f"{node.op}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
