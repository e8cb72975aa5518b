"""Tiny arithmetic expression grammar for boundary data and coefficients.

Supported: numbers, the variables r, rho, theta, the functions sin, cos,
exp, the operators + - * / and powers (^ or **), and parentheses.  This
covers every demo and manufactured problem without embedding a scripting
language; expressions evaluate vectorized over numpy arrays.
"""

from __future__ import annotations

import re

import numpy as np

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
                    r"|\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[()+\-*/^,]))")

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_VARIABLES = ("r", "rho", "theta")


class ExpressionError(ValueError):
    pass


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ExpressionError(f"cannot tokenize {text[pos:]!r}")
        num, ident, op = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif ident is not None:
            out.append(("ident", ident))
        else:
            out.append(("op", "**" if op == "^" else op))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.pos]
        if kind and tok[0] != kind or value is not None and tok[1] != value:
            raise ExpressionError(f"unexpected token {tok[1]!r}")
        self.pos += 1
        return tok

    # expr := term ((+|-) term)*
    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "**"):
            self.take()
            return ("pow", node, self.unary())
        return node

    def atom(self):
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return ("num", value)
        if kind == "ident":
            self.take()
            if value in _FUNCTIONS:
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                return ("call", value, arg)
            if value in _VARIABLES:
                return ("var", value)
            raise ExpressionError(f"unknown identifier {value!r}")
        if (kind, value) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ExpressionError(f"unexpected token {value!r}")


def parse_expression(text: str):
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    if parser.peek()[0] != "end":
        raise ExpressionError(f"trailing input near {parser.peek()[1]!r}")
    return node


def _eval(node, env):
    op = node[0]
    if op == "num":
        return node[1]
    if op == "var":
        return env[node[1]]
    if op == "neg":
        return -_eval(node[1], env)
    if op == "call":
        return _FUNCTIONS[node[1]](_eval(node[2], env))
    a = _eval(node[1], env)
    b = _eval(node[2], env)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "pow":
        return a**b
    raise ExpressionError(f"bad node {op!r}")


def compile_expression(text: str):
    """Compile to a callable (r, rho, theta) -> array."""
    node = parse_expression(text)

    def fn(r, rho, theta):
        return _eval(node, {"r": np.asarray(r, float),
                            "rho": np.asarray(rho, float),
                            "theta": np.asarray(theta, float)})

    fn.source = text
    return fn


def poly_to_expression(poly) -> str:
    """Render a PolyField as a grammar-conformant string (exact fractions)."""
    if not poly.coeffs:
        return "0"
    parts = []
    for (i, j), c in sorted(poly.coeffs.items()):
        from fractions import Fraction

        if isinstance(c, Fraction):
            cs = f"({c.numerator}/{c.denominator})" if c.denominator != 1 else f"({c.numerator})"
        else:
            cs = f"({c!r})"
        term = cs
        if i:
            term += f"*r^{i}" if i > 1 else "*r"
        if j:
            term += f"*rho^{j}" if j > 1 else "*rho"
        parts.append(term)
    return " + ".join(parts)
