"""Expression language for map branches and observables.

Grammar (full reference in docs/expr-grammar.md)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | 'x' | 'pi' | FUNC '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so
``-x^2`` parses as ``-(x^2)``.  Functions: sin, cos, exp, log, sqrt, abs.
First derivatives come from dual-number propagation, never finite
differences; ``abs`` has derivative 0 at the kink by convention.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ToolError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")


class ParseError(ToolError):
    """Syntax error in an expression string; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"syntax error at offset {offset}: {message}")
        self.offset = offset


class EvalError(ToolError):
    """Domain violation during evaluation (log of non-positive, etc.)."""


def _check(ok, message: str) -> None:
    if not ok:
        raise EvalError(message)


def _check_pow_domain(base, expo) -> None:
    expo_is_integer = np.all(np.equal(expo, np.floor(expo)))
    if not expo_is_integer:
        _check(np.all(np.greater_equal(base, 0.0)),
               "negative base with non-integer exponent")
    _check(not np.any(np.logical_and(np.equal(base, 0.0), np.less(expo, 0.0))),
           "zero base with negative exponent")


class Dual:
    """Dual number (value, first derivative) for forward-mode differentiation.

    ``val`` and ``dot`` may be floats or same-shape arrays.
    """

    __slots__ = ("val", "dot")

    def __init__(self, val, dot):
        self.val = val
        self.dot = dot

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val + o.val, self.dot + o.dot)
        return Dual(self.val + o, self.dot)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val - o.val, self.dot - o.dot)
        return Dual(self.val - o, self.dot)

    def __rsub__(self, o):
        return Dual(o - self.val, -self.dot)

    def __mul__(self, o):
        if isinstance(o, Dual):
            return Dual(self.val * o.val, self.dot * o.val + self.val * o.dot)
        return Dual(self.val * o, self.dot * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual):
            _check(np.all(np.not_equal(o.val, 0.0)), "division by zero")
            return Dual(self.val / o.val,
                        (self.dot * o.val - self.val * o.dot) / (o.val * o.val))
        _check(np.all(np.not_equal(o, 0.0)), "division by zero")
        return Dual(self.val / o, self.dot / o)

    def __rtruediv__(self, o):
        _check(np.all(np.not_equal(self.val, 0.0)), "division by zero")
        return Dual(o / self.val, -o * self.dot / (self.val * self.val))

    def __neg__(self):
        return Dual(-self.val, -self.dot)

    def __pow__(self, o):
        if isinstance(o, Dual):
            if np.all(np.equal(o.dot, 0.0)):
                return self._pow_const(o.val)
            _check(np.all(np.greater(self.val, 0.0)),
                   "varying exponent needs a positive base")
            val = self.val ** o.val
            dot = val * (o.dot * np.log(self.val) + o.val * self.dot / self.val)
            return Dual(val, dot)
        return self._pow_const(o)

    def __rpow__(self, base):
        if np.all(np.equal(self.dot, 0.0)):
            _check_pow_domain(base, self.val)
            return Dual(base ** self.val, np.zeros_like(np.asarray(self.dot, dtype=float)))
        _check(np.all(np.greater(base, 0.0)),
               "varying exponent needs a positive base")
        val = base ** self.val
        return Dual(val, val * np.log(base) * self.dot)

    def _pow_const(self, p):
        _check_pow_domain(self.val, p)
        if np.all(np.equal(p, 0.0)):
            one = np.ones_like(np.asarray(self.val, dtype=float))
            return Dual(one + 0.0 if np.ndim(self.val) else 1.0,
                        np.zeros_like(np.asarray(self.val, dtype=float)) if np.ndim(self.val) else 0.0)
        val = self.val ** p
        with np.errstate(divide="ignore", invalid="ignore"):
            dot = p * self.val ** (p - 1.0) * self.dot
        return Dual(val, dot)


def _apply_func(name: str, v):
    if isinstance(v, Dual):
        a, d = v.val, v.dot
        if name == "sin":
            return Dual(np.sin(a), np.cos(a) * d)
        if name == "cos":
            return Dual(np.cos(a), -np.sin(a) * d)
        if name == "exp":
            e = np.exp(a)
            return Dual(e, e * d)
        if name == "log":
            _check(np.all(np.greater(a, 0.0)), "log of non-positive argument")
            return Dual(np.log(a), d / a)
        if name == "sqrt":
            _check(np.all(np.greater_equal(a, 0.0)), "sqrt of negative argument")
            root = np.sqrt(a)
            with np.errstate(divide="ignore", invalid="ignore"):
                dot = d / (2.0 * root)
            return Dual(root, dot)
        # abs: derivative 0 at the kink (sign(0) = 0)
        return Dual(np.abs(a), np.sign(a) * d)
    if name == "sin":
        return np.sin(v)
    if name == "cos":
        return np.cos(v)
    if name == "exp":
        return np.exp(v)
    if name == "log":
        _check(np.all(np.greater(v, 0.0)), "log of non-positive argument")
        return np.log(v)
    if name == "sqrt":
        _check(np.all(np.greater_equal(v, 0.0)), "sqrt of negative argument")
        return np.sqrt(v)
    return np.abs(v)


@dataclass(frozen=True)
class Num:
    value: float

    def _eval(self, x):
        return self.value


@dataclass(frozen=True)
class Var:
    def _eval(self, x):
        return x


@dataclass(frozen=True)
class Pi:
    def _eval(self, x):
        return math.pi


@dataclass(frozen=True)
class Neg:
    arg: object

    def _eval(self, x):
        return -self.arg._eval(x)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def _eval(self, x):
        a = self.left._eval(x)
        b = self.right._eval(x)
        op = self.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if not isinstance(a, Dual) and not isinstance(b, Dual):
                _check(np.all(np.not_equal(b, 0.0)), "division by zero")
            return a / b
        # '^'
        if not isinstance(a, Dual) and not isinstance(b, Dual):
            _check_pow_domain(a, b)
        return a ** b


@dataclass(frozen=True)
class Call:
    func: str
    arg: object

    def _eval(self, x):
        return _apply_func(self.func, self.arg._eval(x))


Expression = (Num, Var, Pi, Neg, BinOp, Call)


_NUMBER_RE = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = "+-*/^()"


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(("num", m.group(), i))
            i = m.end()
            continue
        m = _NAME_RE.match(text, i)
        if m:
            tokens.append(("name", m.group(), i))
            i = m.end()
            continue
        if ch in _OPS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self):
        return self.tokens[self.i]

    def _next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        kind, text, pos = self._peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self._peek()[0] in ("+", "-"):
            op = self._next()[0]
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self._peek()[0] in ("*", "/"):
            op = self._next()[0]
            e = BinOp(op, e, self.factor())
        return e

    def factor(self):
        if self._peek()[0] == "-":
            self._next()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self._peek()[0] == "^":
            self._next()
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        kind, text, pos = self._next()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "x":
                return Var()
            if text == "pi":
                return Pi()
            if text in FUNCTIONS:
                kind2, text2, pos2 = self._next()
                if kind2 != "(":
                    raise ParseError(f"expected '(' after {text!r}", pos2)
                arg = self.expr()
                kind3, _, pos3 = self._next()
                if kind3 != ")":
                    raise ParseError("unbalanced parentheses", pos3)
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if kind == "(":
            e = self.expr()
            kind2, _, pos2 = self._next()
            if kind2 != ")":
                raise ParseError("unbalanced parentheses", pos2)
            return e
        if kind == "end":
            raise ParseError("empty operand", pos)
        raise ParseError(f"unexpected {text!r}", pos)


def parse(text: str):
    """Parse an expression string into an AST; raise ParseError with offset."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


def evaluate(e, x):
    """Evaluate ``e`` at ``x`` (float or ndarray, IEEE double precision)."""
    v = e._eval(x)
    if isinstance(x, np.ndarray) and np.ndim(v) == 0:
        return np.full(x.shape, float(v))
    return v


def eval_with_derivative(e, x):
    """Return ``(value, derivative)`` of ``e`` at ``x`` via dual numbers."""
    if isinstance(x, np.ndarray):
        seed = Dual(x.astype(float, copy=False), np.ones(x.shape))
    else:
        seed = Dual(float(x), 1.0)
    out = e._eval(seed)
    if not isinstance(out, Dual):
        if isinstance(x, np.ndarray):
            return np.full(x.shape, float(out)), np.zeros(x.shape)
        return float(out), 0.0
    val, dot = out.val, out.dot
    if isinstance(x, np.ndarray):
        if np.ndim(val) == 0:
            val = np.full(x.shape, float(val))
        if np.ndim(dot) == 0:
            dot = np.full(x.shape, float(dot))
    return val, dot


# precedence levels for the printer: + - (1), * / (2), unary - (3), ^ (4), atoms (5)
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_expression(e) -> str:
    """Print an AST back to parseable text; parse(format_expression(e))
    evaluates identically to e."""
    return _fmt(e, 0)


def _fmt(e, context: int) -> str:
    if isinstance(e, Num):
        text = repr(float(e.value))
        prec = 3 if math.copysign(1.0, e.value) < 0 else 5
        return f"({text})" if prec < context else text
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Call):
        return f"{e.func}({_fmt(e.arg, 0)})"
    if isinstance(e, Neg):
        text = "-" + _fmt(e.arg, 3)
        return f"({text})" if context > 3 else text
    if isinstance(e, BinOp):
        if e.op == "^":
            text = f"{_fmt(e.left, 5)}^{_fmt(e.right, 4)}"
            return f"({text})" if context > 4 else text
        prec = _PREC[e.op]
        spacer = " " if prec == 1 else ""
        text = f"{_fmt(e.left, prec)}{spacer}{e.op}{spacer}{_fmt(e.right, prec + 1)}"
        return f"({text})" if context > prec else text
    raise TypeError(f"not an expression node: {e!r}")
