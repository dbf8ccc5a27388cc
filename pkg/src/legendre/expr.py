"""Textual math expressions and Taylor-jet evaluation.

Grammar (see docs/grammar.md)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := number | name | name "(" expr ("," expr)* ")" | "(" expr ")"

``^`` binds tighter than unary minus (``-x^2 == -(x^2)``) and is
right-associative.  Derivatives come from propagating truncated power series
through the tree, never from finite differences.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from . import series as S
from . import specfun
from .errors import DomainError, ExpressionSyntaxError, NonFinite, UnknownFunction

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Sym:
    """A named parameter, bound to a number at evaluation time."""

    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Const, Var, Sym, Neg, BinOp, Call]

CONSTANTS = {"pi": math.pi, "e": math.e}

# ---------------------------------------------------------------------------
# series rules for named functions

SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)


def _require(ok, message: str) -> None:
    if not np.all(ok):
        raise DomainError(message)


def _sq(u):
    return S.mul(u, u)


def _one(u):
    return S.constant(np.ones(u.shape[1:]), len(u) - 1)


def _s_sin(u):
    return S.sin_cos(u)[0]


def _s_cos(u):
    return S.sin_cos(u)[1]


def _s_tan(u):
    s, c = S.sin_cos(u)
    _require(c[0] != 0.0, "tan undefined where cos vanishes")
    return S.div(s, c)


def _s_sinh(u):
    return S.sinh_cosh(u)[0]


def _s_cosh(u):
    return S.sinh_cosh(u)[1]


def _s_tanh(u):
    s, c = S.sinh_cosh(u)
    return S.div(s, c)


def _s_asin(u):
    n = len(u) - 1
    if n == 0:
        _require(np.abs(u[0]) <= 1.0, "asin argument outside [-1, 1]")
        return np.arcsin(u)
    _require(np.abs(u[0]) < 1.0, "asin not differentiable outside (-1, 1)")
    return S.from_derivative(u, np.arcsin(u[0]), lambda v: S.power(_one(v) - _sq(v), -0.5))


def _s_acos(u):
    n = len(u) - 1
    if n == 0:
        _require(np.abs(u[0]) <= 1.0, "acos argument outside [-1, 1]")
        return np.arccos(u)
    _require(np.abs(u[0]) < 1.0, "acos not differentiable outside (-1, 1)")
    return S.from_derivative(u, np.arccos(u[0]), lambda v: -S.power(_one(v) - _sq(v), -0.5))


def _s_atan(u):
    return S.from_derivative(u, np.arctan(u[0]), lambda v: S.reciprocal(_one(v) + _sq(v)))


def _s_asinh(u):
    return S.from_derivative(u, np.arcsinh(u[0]), lambda v: S.power(_one(v) + _sq(v), -0.5))


def _s_acosh(u):
    if len(u) == 1:
        _require(u[0] >= 1.0, "acosh argument below 1")
        return np.arccosh(u)
    _require(u[0] > 1.0, "acosh not differentiable at or below 1")
    return S.from_derivative(u, np.arccosh(u[0]), lambda v: S.power(_sq(v) - _one(v), -0.5))


def _s_atanh(u):
    _require(np.abs(u[0]) < 1.0, "atanh argument outside (-1, 1)")
    return S.from_derivative(u, np.arctanh(u[0]), lambda v: S.reciprocal(_one(v) - _sq(v)))


def _s_exp(u):
    return S.exp(u)


def _s_ln(u):
    return S.log(u)


def _s_log(b, u):
    return S.div(S.log(u), S.log(b))


def _s_sqrt(u):
    if len(u) == 1:
        _require(u[0] >= 0.0, "sqrt of negative value")
        return np.sqrt(u)
    _require(u[0] > 0.0, "sqrt not differentiable at or below 0")
    return S.power(u, 0.5)


def _s_abs(u):
    if len(u) > 1:
        _require(u[0] != 0.0, "abs not differentiable at 0")
    return np.sign(u[0]) * u if len(u) > 1 else np.abs(u)


def _s_erf(u):
    return S.from_derivative(u, specfun.erf(u[0]), lambda v: (2.0 / SQRT_PI) * S.exp(-_sq(v)))


def _s_erfc(u):
    return S.from_derivative(u, specfun.erfc(u[0]), lambda v: (-2.0 / SQRT_PI) * S.exp(-_sq(v)))


def _s_phi(u):
    return S.from_derivative(u, specfun.phi(u[0]), lambda v: S.exp(-0.5 * _sq(v)) / SQRT_2PI)


def _lambert(branch):
    def rule(u):
        w0 = specfun.lambert_w_array(u[0], branch)
        if len(u) > 1:
            _require(w0 != -1.0, "lambert W not differentiable at the branch point")

        def fprime(v):
            return S.div(S.exp(-v), _one(v) + v)

        return S.implicit(u, w0, fprime)

    return rule


def _lambert_of_exp(u):
    """W0(exp(u)) evaluated from u, so large u does not overflow exp."""
    w0 = np.vectorize(specfun.lambert_w_exp, otypes=[float])(u[0])
    return S.implicit(u, w0, lambda v: S.div(v, _one(v) + v))


def _s_erfinv(u):
    v0 = specfun.erfinv(u[0])
    return S.implicit(u, v0, lambda v: (SQRT_PI / 2.0) * S.exp(_sq(v)))


def _s_erfcinv(u):
    v0 = specfun.erfcinv(u[0])
    return S.implicit(u, v0, lambda v: (-SQRT_PI / 2.0) * S.exp(_sq(v)))


def _s_probit(u):
    v0 = specfun.probit(u[0])
    return S.implicit(u, v0, lambda v: SQRT_2PI * S.exp(0.5 * _sq(v)))


def _s_ei(u):
    return S.from_derivative(u, specfun.expint_ei(u[0]), lambda v: S.div(S.exp(v), v))


def _s_li(u):
    value = specfun.li(u[0])
    if len(u) > 1:
        _require(u[0] > 0.0, "li not differentiable at 0")
    return S.from_derivative(u, value, lambda v: S.reciprocal(S.log(v)))


FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "sin": (1, _s_sin),
    "cos": (1, _s_cos),
    "tan": (1, _s_tan),
    "asin": (1, _s_asin),
    "acos": (1, _s_acos),
    "atan": (1, _s_atan),
    "sinh": (1, _s_sinh),
    "cosh": (1, _s_cosh),
    "tanh": (1, _s_tanh),
    "asinh": (1, _s_asinh),
    "acosh": (1, _s_acosh),
    "atanh": (1, _s_atanh),
    "exp": (1, _s_exp),
    "ln": (1, _s_ln),
    "log": (2, _s_log),
    "sqrt": (1, _s_sqrt),
    "abs": (1, _s_abs),
    "erf": (1, _s_erf),
    "erfc": (1, _s_erfc),
    "phi": (1, _s_phi),
    "lambertw0": (1, _lambert(specfun.Branch.W0)),
    "lambertw_1": (1, _lambert(specfun.Branch.WM1)),
    # inverse and integral special functions used by the special-function pairs
    "erfinv": (1, _s_erfinv),
    "erfcinv": (1, _s_erfcinv),
    "probit": (1, _s_probit),
    "ei": (1, _s_ei),
    "li": (1, _s_li),
}

# ---------------------------------------------------------------------------
# tokenizer and parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(
                f"unexpected character {text[bad]!r}", text, _byte_offset(text, bad)
            )
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, variable: str, parameters: frozenset):
        self.text = text
        self.variable = variable
        self.parameters = parameters
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        return ExpressionSyntaxError(message, self.text, _byte_offset(self.text, tok.pos))

    def expect(self, text: str) -> None:
        tok = self.take()
        if tok.text != text or tok.kind != "op":
            raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)

    def parse(self) -> Node:
        node = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "name":
            if self.peek().kind == "op" and self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownFunction(tok.text)
                self.take()
                args = [self.expr()]
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                arity = FUNCTIONS[tok.text][0]
                if len(args) != arity:
                    raise self.error(
                        f"{tok.text} takes {arity} argument(s), got {len(args)}", tok
                    )
                return Call(tok.text, tuple(args))
            if tok.text == self.variable:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            if tok.text in self.parameters:
                return Sym(tok.text)
            raise self.error(f"unknown name {tok.text!r}", tok)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


# ---------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(node: Node) -> str:
    """Render with the minimum parentheses needed to reparse the same tree."""

    def wrap(child: Node, ok: bool) -> str:
        s = to_text(child)
        return s if ok else f"({s})"

    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Const, Var, Sym)):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.operand, _prec(node.operand) >= 3)
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    p = _PREC[node.op]
    if node.op == "^":
        left = wrap(node.left, _prec(node.left) > 4)
        right = wrap(node.right, _prec(node.right) >= 3)
        return f"{left}^{right}"
    left = wrap(node.left, _prec(node.left) >= p)
    right = wrap(node.right, _prec(node.right) > p)
    return f"{left} {node.op} {right}" if p == 1 else f"{left}*{right}" if node.op == "*" else f"{left}/{right}"


# ---------------------------------------------------------------------------
# public types


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor expansion: ``coeffs[k] = f^(k)(basepoint) / k!``."""

    basepoint: float
    coeffs: tuple

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.coeffs):
            raise NonFinite(f"non-finite jet coefficients {self.coeffs}")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def derivative(self, k: int) -> float:
        return self.coeffs[k] * math.factorial(k)

    def derivatives(self) -> list[float]:
        return [c * math.factorial(k) for k, c in enumerate(self.coeffs)]

    def __call__(self, x: float) -> float:
        """Evaluate the Taylor polynomial at ``x``."""
        h = x - self.basepoint
        out = 0.0
        for c in reversed(self.coeffs):
            out = out * h + c
        return out

    @classmethod
    def from_array(cls, basepoint: float, coeffs) -> "Jet":
        return cls(float(basepoint), tuple(float(c) for c in coeffs))


@dataclass(frozen=True)
class Expression:
    ast: Node
    source: str
    variable: str = "x"
    parameters: frozenset = frozenset()

    def __str__(self) -> str:
        return to_text(self.ast)

    def bind(self, params: Mapping[str, float]) -> "Expression":
        """Replace parameters by numbers."""

        def sub(node: Node) -> Node:
            if isinstance(node, Sym) and node.name in params:
                v = float(params[node.name])
                return Neg(Num(-v)) if v < 0 or (v == 0 and math.copysign(1, v) < 0) else Num(v)
            if isinstance(node, Neg):
                return Neg(sub(node.operand))
            if isinstance(node, BinOp):
                return BinOp(node.op, sub(node.left), sub(node.right))
            if isinstance(node, Call):
                return Call(node.name, tuple(sub(a) for a in node.args))
            return node

        ast = sub(self.ast)
        return Expression(ast, to_text(ast), self.variable, self.parameters - set(params))

    def free_parameters(self) -> set[str]:
        found = set()

        def walk(node: Node) -> None:
            if isinstance(node, Sym):
                found.add(node.name)
            elif isinstance(node, Neg):
                walk(node.operand)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Call):
                for a in node.args:
                    walk(a)

        walk(self.ast)
        return found


def parse(text: str, variable: str = "x", parameters: Iterable[str] = ()) -> Expression:
    """Parse ``text`` into an :class:`Expression` in the given variable.

    Names other than the variable, ``pi``, ``e`` and the declared
    ``parameters`` are rejected.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", text, 0)
    params = frozenset(parameters)
    ast = _Parser(text, variable, params).parse()
    return Expression(ast, text, variable, params)


# ---------------------------------------------------------------------------
# evaluation


def _series(node: Node, x0: np.ndarray, order: int, env: Mapping[str, float]) -> np.ndarray:
    if isinstance(node, Var):
        return S.variable(x0, order)
    if isinstance(node, Num):
        return S.constant(np.full(x0.shape, node.value), order)
    if isinstance(node, Const):
        return S.constant(np.full(x0.shape, CONSTANTS[node.name]), order)
    if isinstance(node, Sym):
        try:
            return S.constant(np.full(x0.shape, float(env[node.name])), order)
        except KeyError:
            raise DomainError(f"parameter {node.name!r} is unbound") from None
    if isinstance(node, Neg):
        return -_series(node.operand, x0, order, env)
    if isinstance(node, Call):
        if node.name == "lambertw0" and isinstance(node.args[0], Call) and node.args[0].name == "exp":
            return _lambert_of_exp(_series(node.args[0].args[0], x0, order, env))
        args = [_series(a, x0, order, env) for a in node.args]
        return FUNCTIONS[node.name][1](*args)
    a = _series(node.left, x0, order, env)
    b = _series(node.right, x0, order, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return S.mul(a, b)
    if node.op == "/":
        if np.any(b[0] == 0.0):
            raise DomainError("division by zero")
        return S.div(a, b)
    # power: constant exponent takes the real-power rule, otherwise exp(b ln a)
    if np.all(b[1:] == 0.0):
        exps = np.unique(b[0])
        if len(exps) == 1:
            return S.power(a, float(exps[0]))
        return np.stack([S.power(a[:, i : i + 1], float(b[0, i]))[:, 0] for i in range(a.shape[1])], axis=1)
    return S.exp(S.mul(b, S.log(a)))


def eval_series(e: Expression, x0, order: int = 0, params: Mapping[str, float] | None = None) -> np.ndarray:
    """Jets at many basepoints at once: returns shape ``(order + 1, *x0.shape)``."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    x0 = np.asarray(x0, dtype=float)
    flat = x0.reshape(-1)
    with np.errstate(all="ignore"):
        out = _series(e.ast, flat, order, params or {})
    out = np.broadcast_to(out, (order + 1,) + flat.shape)
    if not np.all(np.isfinite(out)):
        raise NonFinite(f"non-finite value while evaluating {e}")
    return out.reshape((order + 1,) + x0.shape)


def eval_jet(e: Expression, basepoint: float, order: int, params: Mapping[str, float] | None = None) -> Jet:
    coeffs = eval_series(e, np.array([basepoint]), order, params)[:, 0]
    return Jet.from_array(basepoint, coeffs)


def eval(e: Expression, x: float, params: Mapping[str, float] | None = None) -> float:  # noqa: A001
    return float(eval_series(e, np.array([x]), 0, params)[0, 0])


def deriv(e: Expression, x: float, k: int, params: Mapping[str, float] | None = None) -> float:
    return eval_jet(e, x, k, params).derivative(k)
