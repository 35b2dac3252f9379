"""Analytical formulas: parsing, printing, vectorised evaluation and
symbolic differentiation.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' unary)?          # right associative
    primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'

so ``-2^2 == -4`` and ``2^3^2 == 512``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Call",
    "Expression",
    "ExpressionError",
    "ExpressionSyntaxError",
    "UnknownIdentifierError",
    "UnknownFunctionError",
    "ArityError",
    "NonDifferentiableError",
    "parse_expression",
    "to_string",
    "differentiate",
    "symbolic_gradient",
]


class ExpressionError(ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ExpressionError):
    pass


class UnknownFunctionError(ExpressionError):
    pass


class ArityError(ExpressionError):
    pass


class NonDifferentiableError(ExpressionError):
    pass


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


FUNCTIONS = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "tan": (1, np.tan),
    "exp": (1, np.exp),
    "log": (1, np.log),
    "sqrt": (1, np.sqrt),
    "abs": (1, np.abs),
    "tanh": (1, np.tanh),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}

_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = set(names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Unary("-", self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def primary(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise UnknownFunctionError(
                        f"unknown function {val!r} at position {pos}; "
                        f"supported: {', '.join(sorted(FUNCTIONS))}"
                    )
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                arity = FUNCTIONS[val][0]
                if len(args) != arity:
                    raise ArityError(
                        f"{val} expects {arity} argument(s), got {len(args)} (position {pos})"
                    )
                return Call(val, tuple(args))
            if val not in self.names:
                raise UnknownIdentifierError(f"unknown identifier {val!r} at position {pos}")
            return Var(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"unexpected {found}", pos)


def parse_expression(text, input_names):
    """Parse ``text`` into an :class:`Expression` over ``input_names``."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    names = list(input_names)
    return Expression(_Parser(text, names).parse(), names)


# ---------------------------------------------------------------- printing


def to_string(node):
    """Fully parenthesised rendering; parses back to an equal-valued tree."""
    if isinstance(node, Const):
        s = repr(float(node.value))
        return f"({s})" if node.value < 0 or s.startswith("-") else s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_string(node.left)}{node.op}{to_string(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({','.join(to_string(a) for a in node.args)})"
    raise TypeError(node)


# ---------------------------------------------------------------- evaluation


def _compile(node, index):
    if isinstance(node, Const):
        v = float(node.value)
        return lambda X: np.full(X.shape[0], v)
    if isinstance(node, Var):
        j = index[node.name]
        return lambda X: X[:, j]
    if isinstance(node, Unary):
        f = _compile(node.operand, index)
        return lambda X: -f(X)
    if isinstance(node, Binary):
        f, g, op = _compile(node.left, index), _compile(node.right, index), _BINARY[node.op]
        return lambda X: op(f(X), g(X))
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name][1]
        args = [_compile(a, index) for a in node.args]
        if len(args) == 1:
            a0 = args[0]
            return lambda X: fn(a0(X))
        a0, a1 = args
        return lambda X: fn(a0(X), a1(X))
    raise TypeError(node)


def _variables(node, acc):
    if isinstance(node, Var):
        acc.add(node.name)
    elif isinstance(node, Unary):
        _variables(node.operand, acc)
    elif isinstance(node, Binary):
        _variables(node.left, acc)
        _variables(node.right, acc)
    elif isinstance(node, Call):
        for a in node.args:
            _variables(a, acc)
    return acc


class Expression:
    """A parsed scalar formula over an ordered list of input names."""

    def __init__(self, ast, input_names):
        self.ast = ast
        self.input_names = list(input_names)
        unknown = _variables(ast, set()) - set(self.input_names)
        if unknown:
            raise UnknownIdentifierError(f"unknown identifier(s) {sorted(unknown)}")
        self._fn = _compile(ast, {n: i for i, n in enumerate(self.input_names)})

    def __str__(self):
        return to_string(self.ast)

    def __repr__(self):
        return f"Expression({to_string(self.ast)!r}, {self.input_names})"

    def evaluate(self, X):
        """Evaluate on an (n, d) array; returns shape (n,). No error checking."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        with np.errstate(all="ignore"):
            return np.asarray(self._fn(X), dtype=float)

    def __call__(self, *x):
        if len(x) == 1 and np.ndim(x[0]) >= 1:
            x = x[0]
        return float(self.evaluate(np.asarray(x, dtype=float)[None, :])[0])

    def derivative(self, name):
        return Expression(differentiate(self.ast, name), self.input_names)

    def gradient(self):
        return [self.derivative(n) for n in self.input_names]


# ---------------------------------------------------------------- differentiation

ZERO = Const(0.0)
ONE = Const(1.0)


def _is(node, value):
    return isinstance(node, Const) and node.value == value


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary):
        return a.operand
    return Unary("-", a)


def _add(a, b):
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def _sub(a, b):
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def _mul(a, b):
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return _neg(b)
    if _is(b, -1.0):
        return _neg(a)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Binary("*", a, b)


def _div(a, b):
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    return Binary("/", a, b)


def _pow(a, b):
    if _is(b, 0.0):
        return ONE
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value**b.value)
    return Binary("^", a, b)


def _call(name, *args):
    return Call(name, tuple(args))


def differentiate(node, name):
    """AST of d(node)/d(name) with light constant folding."""
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == name else ZERO
    if isinstance(node, Unary):
        return _neg(differentiate(node.operand, name))
    if isinstance(node, Binary):
        u, v = node.left, node.right
        du, dv = differentiate(u, name), differentiate(v, name)
        if node.op == "+":
            return _add(du, dv)
        if node.op == "-":
            return _sub(du, dv)
        if node.op == "*":
            return _add(_mul(du, v), _mul(u, dv))
        if node.op == "/":
            return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, Const(2.0)))
        if node.op == "^":
            if _is(dv, 0.0):
                if isinstance(v, Const):
                    return _mul(_mul(v, _pow(u, Const(v.value - 1.0))), du)
                return _mul(_mul(v, _pow(u, _sub(v, ONE))), du)
            # general case u^v * (v' log u + v u'/u)
            return _mul(node, _add(_mul(dv, _call("log", u)), _div(_mul(v, du), u)))
    if isinstance(node, Call):
        if node.name in ("abs", "min", "max"):
            raise NonDifferentiableError(f"{node.name} is not differentiable")
        u = node.args[0]
        du = differentiate(u, name)
        if _is(du, 0.0):
            return ZERO
        if node.name == "sin":
            outer = _call("cos", u)
        elif node.name == "cos":
            outer = _neg(_call("sin", u))
        elif node.name == "tan":
            outer = _div(ONE, _pow(_call("cos", u), Const(2.0)))
        elif node.name == "exp":
            outer = node
        elif node.name == "log":
            return _div(du, u)
        elif node.name == "sqrt":
            return _div(du, _mul(Const(2.0), node))
        elif node.name == "tanh":
            outer = _sub(ONE, _pow(node, Const(2.0)))
        else:  # pragma: no cover
            raise NonDifferentiableError(node.name)
        return _mul(outer, du)
    raise TypeError(node)


def symbolic_gradient(expr: Expression):
    """List of partial-derivative expressions, one per input name."""
    return expr.gradient()
