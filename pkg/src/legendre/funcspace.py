"""Core domain types: intervals, scalar functions, dual-curve samples,
convex polylines and cataloged transform pairs."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import integrate, optimize

from . import series as S
from .errors import DomainError, InvalidParameter, NonFinite, QuadratureFailure
from .expr import Expression, Jet, eval_series, parse

INF = math.inf

# ---------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    lo: float = -INF
    hi: float = INF
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")
        if math.isinf(self.lo) and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi) and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def real_line(cls) -> "Interval":
        return cls()

    @classmethod
    def open(cls, lo: float, hi: float) -> "Interval":
        return cls(lo, hi, False, False)

    @classmethod
    def closed(cls, lo: float, hi: float) -> "Interval":
        return cls(lo, hi, True, True)

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(v, v, True, True)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse ``"(0,inf)"``, ``"[-1,1)"`` or a colon range ``"-10:10"`` (closed)."""
        text = text.strip()
        if ":" in text and text[0] not in "([":
            lo, hi = text.split(":", 1)
            return cls(_num(lo), _num(hi), True, True)
        if len(text) < 5 or text[0] not in "([" or text[-1] not in ")]":
            raise ValueError(f"cannot parse interval {text!r}")
        lo, hi = text[1:-1].split(",")
        return cls(_num(lo), _num(hi), text[0] == "[", text[-1] == "]")

    def __str__(self) -> str:
        lo = "-inf" if math.isinf(self.lo) else repr(self.lo)
        hi = "inf" if math.isinf(self.hi) else repr(self.hi)
        return f"{'[' if self.lo_closed else '('}{lo}, {hi}{']' if self.hi_closed else ')'}"

    def to_json(self) -> list:
        return [_jnum(self.lo), _jnum(self.hi), self.lo_closed, self.hi_closed]

    @classmethod
    def from_json(cls, data: Sequence) -> "Interval":
        return cls(_num(data[0]), _num(data[1]), bool(data[2]), bool(data[3]))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def interior_contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def affine_image(self, a: float, b: float = 0.0) -> "Interval":
        """Image under ``x -> a*x + b``."""
        if a == 0:
            return Interval.point(b)
        lo, hi = a * self.lo + b, a * self.hi + b
        if a > 0:
            return Interval(lo, hi, self.lo_closed, self.hi_closed)
        return Interval(hi, lo, self.hi_closed, self.lo_closed)

    def reciprocal_image(self) -> "Interval":
        """Image under ``x -> 1/x`` for an interval on one side of 0."""
        if self.lo < 0 < self.hi:
            raise DomainError(f"{self} contains 0")
        positive = self.lo >= 0

        def inv(v):
            if v == 0:
                return INF if positive else -INF
            return 0.0 if math.isinf(v) else 1.0 / v

        lo, hi = inv(self.hi), inv(self.lo)
        return Interval(lo, hi, self.hi_closed and math.isfinite(lo), self.lo_closed and math.isfinite(hi))

    def minkowski_sum(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi,
                        self.lo_closed and other.lo_closed, self.hi_closed and other.hi_closed)

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise DomainError(f"{self} and {other} are disjoint")
        lc = (self.lo_closed if self.lo == lo else True) and (other.lo_closed if other.lo == lo else True)
        hc = (self.hi_closed if self.hi == hi else True) and (other.hi_closed if other.hi == hi else True)
        return Interval(lo, hi, lc, hc)

    def approx_equal(self, other: "Interval", tol: float = 1e-6) -> bool:
        return _end_close(self.lo, other.lo, tol) and _end_close(self.hi, other.hi, tol)


def _end_close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _num(v: Any) -> float:
    if isinstance(v, str):
        v = v.strip().lower()
        if v in ("inf", "+inf", "infinity"):
            return INF
        if v in ("-inf", "-infinity"):
            return -INF
    return float(v)


def _jnum(v: float) -> Any:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


# ---------------------------------------------------------------------------
# sampling

UNBOUNDED_WINDOW = 8.0
ENDPOINT_OFFSET = 1e-4


def sampling_window(domain: Interval) -> tuple[float, float]:
    """Finite window used to sample a possibly unbounded domain."""
    lo, hi = domain.lo, domain.hi
    if math.isinf(lo) and math.isinf(hi):
        return -UNBOUNDED_WINDOW, UNBOUNDED_WINDOW
    if math.isinf(lo):
        return hi - UNBOUNDED_WINDOW, hi
    if math.isinf(hi):
        return lo, lo + UNBOUNDED_WINDOW
    return lo, hi


def interior_samples(domain: Interval, n: int) -> np.ndarray:
    """``n`` ascending interior points: Chebyshev nodes on bounded domains, a
    tanh-mapped uniform grid on the finite window of an unbounded one.

    Points stay ``1e-4 * width`` away from finite endpoints.
    """
    if n < 1:
        raise ValueError("n must be positive")
    lo, hi = sampling_window(domain)
    if lo == hi:
        return np.full(n, lo)
    delta = ENDPOINT_OFFSET * (hi - lo)
    a, b = lo + delta, hi - delta
    k = np.arange(n)
    if domain.bounded:
        t = -np.cos((2 * k + 1) * np.pi / (2 * n))  # ascending Chebyshev nodes
    else:
        s = (2 * k + 1) / n - 1.0
        t = np.tanh(1.5 * s) / np.tanh(1.5)
    return 0.5 * (a + b) + 0.5 * (b - a) * t


# ---------------------------------------------------------------------------
# function bodies: each maps a flat array of points to a series array


class Body:
    def series(self, x: np.ndarray, order: int) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class ExprBody(Body):
    expr: Expression
    params: Mapping[str, float] = field(default_factory=dict)

    def series(self, x, order):
        return eval_series(self.expr, x, order, self.params)

    def describe(self):
        return str(self.expr.bind(self.params)) if self.params else str(self.expr)


@dataclass(frozen=True)
class ConstBody(Body):
    value: float

    def series(self, x, order):
        return S.constant(np.full(x.shape, self.value), order)

    def describe(self):
        return repr(self.value)


@dataclass(frozen=True)
class IdentityBody(Body):
    def series(self, x, order):
        return S.variable(x, order)

    def describe(self):
        return "x"


@dataclass(frozen=True)
class AffineArgBody(Body):
    """``inner(a*x + b)``"""

    inner: Body
    a: float
    b: float

    def series(self, x, order):
        out = self.inner.series(self.a * x + self.b, order).copy()
        for k in range(1, order + 1):
            out[k] *= self.a**k
        return out

    def describe(self):
        return f"F({self.a!r}*x + {self.b!r}) with F = {self.inner.describe()}"


@dataclass(frozen=True)
class CombineBody(Body):
    op: str
    left: Body
    right: Body

    def series(self, x, order):
        a = self.left.series(x, order)
        b = self.right.series(x, order)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return S.mul(a, b)
        if np.any(b[0] == 0.0):
            raise DomainError("division by zero")
        return S.div(a, b)

    def describe(self):
        return f"({self.left.describe()}) {self.op} ({self.right.describe()})"


@dataclass(frozen=True)
class ComposeBody(Body):
    """``outer(inner(x))``"""

    outer: Body
    inner: Body

    def series(self, x, order):
        u = self.inner.series(x, order)
        return S.compose(self.outer.series(u[0], order), u)

    def describe(self):
        return f"F(G(x)) with F = {self.outer.describe()}, G = {self.inner.describe()}"


@dataclass(frozen=True)
class DerivativeBody(Body):
    base: Body

    def series(self, x, order):
        if isinstance(self.base, IntegralBody):
            return self.base.base.series(x, order)
        return S.derivative(self.base.series(x, order + 1))

    def describe(self):
        return f"d/dx[{self.base.describe()}]"


@dataclass(frozen=True)
class IntegralBody(Body):
    """``int_lower^x base(t) dt`` by adaptive Gauss-Kronrod quadrature."""

    base: Body
    lower: float
    tol: float = 1e-10
    cauchy_pole: float | None = None

    def value(self, x: float) -> float:
        def f(t):
            return float(self.base.series(np.array([t]), 0)[0, 0])

        lo, hi = self.lower, x
        sign = 1.0
        if hi < lo:
            lo, hi, sign = hi, lo, -1.0
        if lo == hi:
            return 0.0
        if self.cauchy_pole is not None and lo < self.cauchy_pole < hi:
            # principal value on a window around the pole, Gauss-Kronrod elsewhere
            c = self.cauchy_pole
            r = 0.5 * min(c - lo, hi - c)

            def g(t):
                if t == c:
                    h = 1e-7 * max(1.0, abs(c))
                    return 0.5 * (f(c - h) * -h + f(c + h) * h)
                return f(t) * (t - c)

            val, err = integrate.quad(g, c - r, c + r, weight="cauchy", wvar=c, epsabs=self.tol / 3, epsrel=0, limit=200)
            for a, b in ((lo, c - r), (c + r, hi)):
                if b > a:
                    v, e = integrate.quad(f, a, b, epsabs=self.tol / 3, epsrel=0, limit=200)
                    val += v
                    err += e
        else:
            val, err = integrate.quad(f, lo, hi, epsabs=self.tol, epsrel=0, limit=200)
        if err > 10 * self.tol * max(1.0, abs(val)):
            raise QuadratureFailure(f"quadrature error estimate {err:.3g} exceeds tolerance")
        return sign * val

    def _values(self, x: np.ndarray) -> np.ndarray:
        """Values at many points: one full integral, then short segments
        between consecutive sorted points, never across the pole."""
        if len(x) < 4:
            return np.array([self.value(float(t)) for t in x])

        def f(t):
            return float(self.base.series(np.array([t]), 0)[0, 0])

        order = np.argsort(x, kind="stable")
        xs = x[order]
        out = np.empty(len(xs))
        seg_tol = self.tol / len(xs)
        prev = None
        for i, t in enumerate(xs):
            t = float(t)
            pole = self.cauchy_pole
            crosses = prev is not None and pole is not None and (prev <= pole <= t)
            if prev is None or crosses or (prev < self.lower < t):
                out[i] = self.value(t)
            elif t == prev:
                out[i] = out[i - 1]
            else:
                with warnings.catch_warnings():
                    # the error estimate below decides failure
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    v, err = integrate.quad(f, prev, t, epsabs=seg_tol, epsrel=0, limit=200)
                if err > 10 * seg_tol * max(1.0, abs(v)):
                    raise QuadratureFailure(f"quadrature error estimate {err:.3g} exceeds tolerance")
                out[i] = out[i - 1] + v
            prev = t
        values = np.empty(len(xs))
        values[order] = out
        return values

    def series(self, x, order):
        values = self._values(np.asarray(x, dtype=float))
        if order == 0:
            return values[None]
        return S.integral(self.base.series(x, order - 1), values)

    def describe(self):
        return f"int_{self.lower!r}^x [{self.base.describe()}] dt"


@dataclass(frozen=True)
class InverseBody(Body):
    """Inverse of a strictly monotone ``base`` on ``interval`` by bracketing."""

    base: Body
    interval: Interval

    def _invert(self, y: float) -> float:
        lo, hi = sampling_window(self.interval) if not self.interval.bounded else (self.interval.lo, self.interval.hi)
        f = lambda t: float(self.base.series(np.array([t]), 0)[0, 0]) - y  # noqa: E731
        a, b = _shrink_bracket(f, self.interval, lo, hi)
        return optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=300)

    def _invert_many(self, ys: np.ndarray) -> np.ndarray:
        """Brackets from a table of ``base``, then safeguarded Newton on all points at once."""
        out = np.full(len(ys), np.nan)
        if len(ys) > 8:
            grid = interior_samples(self.interval, 1025)
            try:
                table = self.base.series(grid, 0)[0]
            except (DomainError, NonFinite):
                table = np.full(len(grid), np.nan)
            d = np.diff(table)
            if np.all(np.isfinite(table)) and (np.all(d > 0) or np.all(d < 0)):
                sign = 1.0 if d[0] > 0 else -1.0
                k = np.searchsorted(sign * table, sign * ys)
                ok = (k > 0) & (k < len(grid))
                a, b, y = grid[k[ok] - 1], grid[k[ok]], ys[ok]
                t = 0.5 * (a + b)
                done = np.zeros(len(t), dtype=bool)
                for _ in range(100):
                    fs = self.base.series(t, 1)
                    r = sign * (fs[0] - y)
                    a = np.where(r < 0, t, a)
                    b = np.where(r > 0, t, b)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        step = t - (fs[0] - y) / fs[1]
                    step = np.where((step > a) & (step < b), step, 0.5 * (a + b))
                    step = np.where(done | (r == 0), t, step)
                    done |= np.abs(step - t) <= 2 * np.finfo(float).eps * np.abs(t)
                    t = step
                    if done.all():
                        break
                out[ok] = t
        for i in np.flatnonzero(np.isnan(out)):
            out[i] = self._invert(float(ys[i]))
        return out

    def series(self, x, order):
        y0 = self._invert_many(np.asarray(x, dtype=float))
        if order == 0:
            return y0[None]
        fs = self.base.series(y0, order)
        r = fs.copy()
        r[0] = 0.0
        out = S.revert(r)
        out[0] = y0
        return out

    def describe(self):
        return f"inverse of [{self.base.describe()}]"


def _shrink_bracket(f: Callable[[float], float], dom: Interval, lo: float, hi: float):
    """Find a sign-changing bracket inside ``dom``, expanding into unbounded ends."""

    def safe(t):
        try:
            v = f(t)
        except (DomainError, NonFinite, OverflowError):
            return math.nan
        return v

    a = lo if dom.lo_closed or math.isinf(dom.lo) else lo + ENDPOINT_OFFSET * 1e-6 * max(1.0, abs(lo)) + 1e-300
    b = hi if dom.hi_closed or math.isinf(dom.hi) else hi - ENDPOINT_OFFSET * 1e-6 * max(1.0, abs(hi)) - 1e-300
    if math.isinf(dom.lo) and not math.isinf(dom.hi):
        a = b - 1.0
    if math.isinf(dom.hi) and not math.isinf(dom.lo):
        b = a + 1.0
    if math.isinf(dom.lo) and math.isinf(dom.hi):
        a, b = -1.0, 1.0
    fa, fb = safe(a), safe(b)
    for _ in range(200):
        if fa * fb <= 0:
            return a, b
        grew = False
        if math.isinf(dom.lo):
            a = a - 2.0 * max(1.0, abs(a))
            fa = safe(a)
            grew = True
        if math.isinf(dom.hi):
            b = b + 2.0 * max(1.0, abs(b))
            fb = safe(b)
            grew = True
        if not grew:
            break
    raise DomainError("value is outside the range of the function on its domain")


@dataclass(frozen=True)
class InfConvBody(Body):
    """Infimal convolution ``inf_t f1(x - t) + f2(t)`` of smooth convex bodies.

    Evaluated at the stationary split ``f1'(x - t) = f2'(t)``; derivatives to
    second order follow from ``1/F'' = 1/f1'' + 1/f2''``.
    """

    f1: Body
    f2: Body
    dom1: Interval
    dom2: Interval

    def split(self, x: float) -> float:
        # feasible t: x - t in dom1 and t in dom2
        t_dom = self.dom2.intersect(self.dom1.affine_image(-1.0, x))
        f1, f2 = self.f1, self.f2

        def phi(t):
            a = f1.series(np.array([x - t]), 1)[1, 0]
            b = f2.series(np.array([t]), 1)[1, 0]
            return b - a  # increasing in t for convex pieces

        lo, hi = sampling_window(t_dom) if not t_dom.bounded else (t_dom.lo, t_dom.hi)
        a, b = _shrink_bracket(phi, t_dom, lo, hi)
        return optimize.brentq(phi, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=300)

    def _splits(self, x: np.ndarray) -> np.ndarray:
        """Splits for many points.  Since 0 <= dt/dx <= 1, the split at x lies
        in [t0, t0 + (x - x0)] given the split t0 at the smallest point x0."""
        if len(x) <= 8:
            return np.array([self.split(float(v)) for v in x])
        order = np.argsort(x, kind="stable")
        xs = x[order]
        t0 = self.split(float(xs[0]))
        a = np.full(len(xs), t0)
        b = t0 + (xs - xs[0])
        for i, xi in enumerate(xs):
            t_dom = self.dom2.intersect(self.dom1.affine_image(-1.0, float(xi)))
            a[i] = max(a[i], t_dom.lo)
            b[i] = min(b[i], t_dom.hi)
        t = 0.5 * (a + b)
        done = a >= b
        t[done] = a[done]
        try:
            for _ in range(200):
                if done.all():
                    break
                s1 = self.f1.series(xs - t, 2)
                s2 = self.f2.series(t, 2)
                r = s2[1] - s1[1]
                a = np.where(r < 0, t, a)
                b = np.where(r > 0, t, b)
                with np.errstate(divide="ignore", invalid="ignore"):
                    step = t - r / (2 * (s1[2] + s2[2]))
                step = np.where((step > a) & (step < b), step, 0.5 * (a + b))
                step = np.where(done | (r == 0), t, step)
                done |= np.abs(step - t) <= 2 * np.finfo(float).eps * np.maximum(np.abs(t), 1e-300)
                t = step
        except (DomainError, NonFinite):
            done[:] = False
        out = np.empty(len(xs))
        out[order] = t
        for i in order[~done]:
            out[i] = self.split(float(x[i]))
        return out

    def series(self, x, order):
        if order > 2:
            raise NotImplementedError("infimal convolution jets are limited to order 2")
        x = np.asarray(x, dtype=float)
        t = self._splits(x)
        s1 = self.f1.series(x - t, order)
        s2 = self.f2.series(t, order)
        out = np.empty((order + 1, len(x)))
        out[0] = s1[0] + s2[0]
        if order >= 1:
            out[1] = s1[1]
        if order >= 2:
            # coefficient = F''/2 with 1/F'' = 1/f1'' + 1/f2''
            out[2] = 0.5 / (1.0 / (2 * s1[2]) + 1.0 / (2 * s2[2]))
        return out

    def describe(self):
        return f"({self.f1.describe()}) inf-conv ({self.f2.describe()})"


@dataclass(frozen=True)
class PiecewiseBody(Body):
    """Pieces on consecutive intervals; a point uses the first piece containing it."""

    pieces: tuple  # of (Interval, Body)

    def series(self, x, order):
        out = np.empty((order + 1, len(x)))
        done = np.zeros(len(x), dtype=bool)
        for dom, body in self.pieces:
            mask = np.array([dom.contains(float(t)) for t in x]) & ~done
            if mask.any():
                out[:, mask] = body.series(x[mask], order)
                done |= mask
        if not done.all():
            raise DomainError(f"point {x[~done][0]!r} outside every piece")
        return out

    def describe(self):
        return "; ".join(f"{b.describe()} on {d}" for d, b in self.pieces)


# ---------------------------------------------------------------------------
# scalar functions


@dataclass(frozen=True)
class ScalarFunction:
    body: Body
    domain: Interval = field(default_factory=Interval)
    label: str = ""

    def series(self, x, order: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        with np.errstate(all="ignore"):
            out = self.body.series(flat, order)
        if not np.all(np.isfinite(out)):
            raise NonFinite(f"non-finite value evaluating {self.label or self.body.describe()}")
        return out.reshape((order + 1,) + x.shape)

    def jet(self, x: float, order: int) -> Jet:
        return Jet.from_array(x, self.series(np.array([x]), order)[:, 0])

    def __call__(self, x):
        out = self.series(x, 0)[0]
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, x, k: int = 1):
        out = self.series(x, k)[k] * math.factorial(k)
        return float(out) if np.ndim(out) == 0 else out

    def describe(self) -> str:
        return self.body.describe()

    # combinators ----------------------------------------------------------

    def with_domain(self, domain: Interval, label: str | None = None) -> "ScalarFunction":
        return replace(self, domain=domain, label=self.label if label is None else label)

    def _lift(self, other) -> Body:
        if isinstance(other, ScalarFunction):
            return other.body
        return ConstBody(float(other))

    def __add__(self, other):
        return ScalarFunction(CombineBody("+", self.body, self._lift(other)), self.domain)

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarFunction(CombineBody("-", self.body, self._lift(other)), self.domain)

    def __rsub__(self, other):
        return ScalarFunction(CombineBody("-", self._lift(other), self.body), self.domain)

    def __mul__(self, other):
        return ScalarFunction(CombineBody("*", self.body, self._lift(other)), self.domain)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarFunction(CombineBody("/", self.body, self._lift(other)), self.domain)

    def __neg__(self):
        return ScalarFunction(CombineBody("*", ConstBody(-1.0), self.body), self.domain)

    def affine_arg(self, a: float, b: float = 0.0) -> "ScalarFunction":
        """``x -> self(a*x + b)`` with the preimage domain."""
        if a == 0:
            raise InvalidParameter("argument scale must be nonzero")
        return ScalarFunction(AffineArgBody(self.body, a, b), self.domain.affine_image(1.0 / a, -b / a))

    def compose(self, inner: "ScalarFunction") -> "ScalarFunction":
        """``x -> self(inner(x))``"""
        return ScalarFunction(ComposeBody(self.body, inner.body), inner.domain)

    def derivative(self) -> "ScalarFunction":
        return ScalarFunction(DerivativeBody(self.body), self.domain, f"d/dx {self.label}")


def identity(domain: Interval | None = None) -> ScalarFunction:
    return ScalarFunction(IdentityBody(), domain or Interval(), "x")


def constant_function(value: float, domain: Interval | None = None) -> ScalarFunction:
    return ScalarFunction(ConstBody(value), domain or Interval(), repr(value))


QUADRATURE_TAGS = {
    # tag: (integrand, lower limit, cauchy pole, natural domain)
    "li": ("1/ln(t)", 0.0, 1.0, Interval(0.0, INF, True, False)),
    "Li": ("1/ln(t)", 2.0, None, Interval(1.0, INF)),
    "erf": ("2/sqrt(pi)*exp(-t^2)", 0.0, None, Interval()),
    "Ei_pos": ("exp(t)/t", None, None, Interval(0.0, INF)),
}


def make_function(
    text_or_tag: str | Expression,
    domain: Interval | None = None,
    label: str = "",
    *,
    variable: str = "x",
    params: Mapping[str, float] | None = None,
    quad_tol: float = 1e-10,
) -> ScalarFunction:
    """Build a :class:`ScalarFunction` from expression text or a quadrature tag.

    Tags of the form ``"quad:li"`` select an integral-defined function
    evaluated by adaptive quadrature (``li`` takes the principal value across
    ``t = 1``).
    """
    if isinstance(text_or_tag, Expression):
        e = text_or_tag
    elif text_or_tag.startswith("quad:"):
        tag = text_or_tag[5:]
        if tag not in QUADRATURE_TAGS:
            raise KeyError(f"unknown quadrature tag {tag!r}")
        integrand, lower, pole, natural = QUADRATURE_TAGS[tag]
        if lower is None:
            raise KeyError(f"quadrature tag {tag!r} has no finite lower limit")
        body = IntegralBody(ExprBody(parse(integrand, "t")), lower, quad_tol, pole)
        return ScalarFunction(body, domain or natural, label or tag)
    else:
        e = parse(text_or_tag, variable, params.keys() if params else ())
    return ScalarFunction(ExprBody(e, dict(params or {})), domain or Interval(), label or str(e))


# ---------------------------------------------------------------------------
# derivative range


_LIMIT_STEPS = 200


def _power_fit(s: np.ndarray, v: np.ndarray) -> tuple[float, float, float]:
    """(q, A, B) with ``v = A + B s**q`` through three points, s decreasing to 0."""
    s1, s2, s3 = s
    ratio = (v[2] - v[1]) / (v[1] - v[0])

    def phi(q):
        if abs(q) < 1e-12:
            return math.log(s3 / s2) / math.log(s2 / s1)
        return (s3**q - s2**q) / (s2**q - s1**q)

    grid = np.linspace(-20.0, 20.0, 161)
    vals = np.array([phi(q) - ratio for q in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(idx) == 0:
        return (-INF, math.nan, math.nan)
    q = optimize.brentq(lambda q: phi(q) - ratio, grid[idx[0]], grid[idx[0] + 1], xtol=1e-14)
    if abs(q) < 1e-12:
        return (q, math.nan, math.nan)
    b = (v[2] - v[1]) / (s3**q - s2**q)
    return (q, float(v[2] - b * s3**q), float(b))


def _extrapolate(ts: list[float], vals: list[float], end: float) -> float | None:
    """Limit of values sampled at geometrically shrinking distances to ``end``.

    The tail is classified at its last position where successive difference
    ratios agree (rounding noise near the end is skipped).  Clearly geometric
    tails take an Aitken step.  Slow tails are fitted both as geometric and
    as ``A + B s**q`` with ``s = 1/|ln distance|`` (exact for logarithmic
    approach such as ``1/ln t``); the model that better predicts the next
    sample wins.  Ratio >= 1 or ``q <= 0`` means divergence.
    """
    n = len(vals)
    if n == 0:
        return None
    if n < 4:
        return vals[-1]
    v = np.asarray(vals)
    d = np.diff(v)
    if d[-1] == 0.0 and d[-2] == 0.0:
        return vals[-1]
    for j in range(len(d) - 1, 1, -1):
        a, b, c = d[j - 2], d[j - 1], d[j]
        if a == 0.0 or np.sign(a) != np.sign(b) or np.sign(b) != np.sign(c):
            continue
        r1, r2 = c / b, b / a
        if abs(r1 - r2) <= 0.3 * max(r1, r2) or (r1 > 1.0 and r2 > 1.0):
            break
    else:
        return vals[-1]
    if r1 < 0.8:
        return float(v[j + 1] + c * r1 / (1.0 - r1))
    if r1 > 1.0 and r2 > 1.0:
        return math.copysign(INF, c)
    t = np.asarray(ts[j - 2 : j + 2])
    dist = np.abs(t) if math.isinf(end) else np.abs(end - t)
    s = 1.0 / np.abs(np.log(dist))
    # one-step-ahead prediction of v[j + 1] from v[j - 2 .. j]
    geo_err = abs(v[j] + b * r2 - v[j + 1])
    q0, a0, b0 = _power_fit(s[:3], v[j - 2 : j + 1])
    log_err = abs(a0 + b0 * s[3] ** q0 - v[j + 1]) if q0 > 0.0 and math.isfinite(a0) else INF
    if geo_err <= log_err:
        if r1 >= 1.0:
            return math.copysign(INF, c)
        return float(v[j + 1] + c * r1 / (1.0 - r1))
    q, limit, _ = _power_fit(s[1:], v[j - 1 : j + 2])
    if not q > 0.05:
        return math.copysign(INF, c)
    return limit


def _end_limit(fk: Callable[[float], float], anchor: float, end: float, scale: float) -> float | None:
    """One-sided limit of ``fk`` approaching ``end`` from ``anchor``.

    Returns +-inf when divergent and None when no value near the end is
    computable.
    """
    ts: list[float] = []
    vals: list[float] = []
    last_t = anchor
    for k in range(1, _LIMIT_STEPS):
        if math.isinf(end):
            t = anchor + math.copysign(scale * 2.0**k, end)
        else:
            t = end - (end - anchor) * 2.0**-k
        if t == last_t or math.isinf(t):
            break
        if math.isfinite(end) and abs(end - t) <= 64 * np.finfo(float).eps * abs(end):
            break
        try:
            v = fk(t)
        except (DomainError, NonFinite, OverflowError, QuadratureFailure):
            break
        if not math.isfinite(v):
            break
        ts.append(t)
        vals.append(v)
        last_t = t
        if len(vals) >= 3 and vals[-1] == vals[-2] == vals[-3]:
            break
    return _extrapolate(ts, vals, end)


def _range_of(f: ScalarFunction, k: int, n_samples: int, domain: Interval | None) -> Interval:
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    dom = domain or f.domain
    xs = interior_samples(dom, n_samples)
    if k >= 1:
        # derivative body avoids evaluating integral-defined values
        f = f.derivative().with_domain(dom)
        k -= 1
    scale_k = float(math.factorial(k))
    vals = f.series(xs, k)[k] * scale_k
    if not np.all(np.isfinite(vals)):
        raise DomainError("non-finite value at a sample")
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi and np.all(vals == vals[0]):
        return Interval.point(lo)

    def fk(t):
        return float(f.series(np.array([t]), k)[k, 0]) * scale_k

    w_lo, w_hi = sampling_window(dom)
    scale = max(1.0, (w_hi - w_lo) / 16.0)
    ends = [
        _end_limit(fk, float(xs[0]), dom.lo, scale),
        _end_limit(fk, float(xs[-1]), dom.hi, scale),
    ]
    ends = [v for v in ends if v is not None]
    lo = min([lo] + ends)
    hi = max([hi] + ends)
    return Interval(lo, hi, False, False)


def range_of_derivative(f: ScalarFunction, n_samples: int = 10_000, domain: Interval | None = None) -> Interval:
    """Interval hull of ``f'`` over the domain.

    Interior samples give the bulk of the hull; one-sided limits toward each
    endpoint extend it, reporting infinite ends where ``f'`` diverges.  The
    hull is closed only when ``f'`` is constant.
    """
    return _range_of(f, 1, n_samples, domain)


def range_of_values(f: ScalarFunction, n_samples: int = 10_000, domain: Interval | None = None) -> Interval:
    """Interval hull of ``f`` itself, computed the same way."""
    return _range_of(f, 0, n_samples, domain)


# ---------------------------------------------------------------------------
# dual-curve samples and polylines


@dataclass(frozen=True)
class DualCurveSample:
    points: tuple  # of (x, m, d)
    source_label: str = ""
    skipped: tuple = ()  # of (x, reason)
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 3)


def _frac(v) -> Fraction | float:
    if isinstance(v, float) and math.isinf(v):
        return v
    return Fraction(v)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Convex polyline: vertices plus the slopes of the two end rays.

    An infinite end slope (``-inf`` on the left, ``+inf`` on the right) marks
    a bounded end where the function jumps to ``+inf``.  Coordinates are kept
    as exact rationals so duality is exact.
    """

    breakpoints: tuple
    left_slope: Any
    right_slope: Any

    def __post_init__(self):
        pts = tuple((Fraction(x), Fraction(y)) for x, y in self.breakpoints)
        if not pts:
            raise ValueError("a polyline needs at least one vertex")
        object.__setattr__(self, "breakpoints", pts)
        object.__setattr__(self, "left_slope", _frac(self.left_slope))
        object.__setattr__(self, "right_slope", _frac(self.right_slope))
        if self.left_slope == INF or self.right_slope == -INF:
            raise ValueError("end slopes point the wrong way")
        for (x0, _), (x1, _) in zip(pts, pts[1:]):
            if not x1 > x0:
                raise ValueError("breakpoint x must be strictly increasing")
        slopes = self.slopes()
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 < s0:
                raise ValueError("polyline is not convex: slopes decrease")

    def chord_slopes(self) -> list:
        p = self.breakpoints
        return [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(p, p[1:])]

    def slopes(self) -> list:
        """End-ray and chord slopes in order, length ``len(breakpoints) + 1``."""
        return [self.left_slope] + self.chord_slopes() + [self.right_slope]

    @property
    def domain(self) -> Interval:
        lo = float(self.breakpoints[0][0]) if self.left_slope == -INF else -INF
        hi = float(self.breakpoints[-1][0]) if self.right_slope == INF else INF
        return Interval(lo, hi, math.isfinite(lo), math.isfinite(hi))

    def __call__(self, x: float) -> float:
        """Value at ``x``; exact (a Fraction) for int or Fraction input."""
        v = self._exact(Fraction(x))
        return v if isinstance(x, (int, Fraction)) and v not in (INF, -INF) else float(v)

    def _exact(self, xf: Fraction):
        p = self.breakpoints
        if xf < p[0][0]:
            if self.left_slope == -INF:
                return INF
            return p[0][1] + self.left_slope * (xf - p[0][0])
        if xf > p[-1][0]:
            if self.right_slope == INF:
                return INF
            return p[-1][1] + self.right_slope * (xf - p[-1][0])
        for (x0, y0), (x1, y1) in zip(p, p[1:]):
            if x0 <= xf <= x1:
                return y0 + (y1 - y0) * (xf - x0) / (x1 - x0)
        return p[0][1]

    def float_breakpoints(self) -> list[tuple[float, float]]:
        return [(float(x), float(y)) for x, y in self.breakpoints]


# ---------------------------------------------------------------------------
# transform pairs


@dataclass(frozen=True)
class TransformPair:
    """A function together with its Legendre transform.

    ``m_domain`` is the closure of the range of ``f'`` over ``x_domain``;
    ``g.domain`` may be larger when ``g`` is given beyond that range.
    Unverified entries may carry text only, with ``f`` and ``g`` unset.
    """

    entry_id: str
    f: ScalarFunction | None
    g: ScalarFunction | None
    x_domain: Interval
    m_domain: Interval
    part: str = ""
    name: str = ""
    f_text: str = ""
    g_text: str = ""
    parameters: Mapping[str, float] = field(default_factory=dict)
    parameter_ranges: Mapping[str, tuple] = field(default_factory=dict)
    notes: str = ""
    verified: bool = True
    quadrature: bool = False
    audit: bool = False

    @property
    def evaluable(self) -> bool:
        return self.f is not None and self.g is not None

    def residual(self, x) -> np.ndarray:
        """``x f'(x) - f(x) - g(f'(x))`` elementwise."""
        if not self.evaluable:
            raise InvalidParameter(f"entry {self.entry_id} has no evaluable functions")
        x = np.asarray(x, dtype=float)
        s = self.f.series(x, 1)
        return x * s[1] - s[0] - self.g(s[1])

    def swapped(self) -> "TransformPair":
        """The pair read right to left, (g, f) on (m_domain, x_domain)."""
        return replace(
            self,
            entry_id=self.entry_id + ".reversed",
            f=self.g,
            g=self.f,
            x_domain=self.m_domain,
            m_domain=self.x_domain,
            f_text=self.g_text,
            g_text=self.f_text,
        )


def one_sided_limit(fn: Callable[[float], float], end: float, anchor: float) -> float | None:
    """Limit of ``fn(t)`` as ``t`` moves from ``anchor`` toward ``end``.

    Returns +-inf on divergence and None when nothing near ``end`` evaluates.
    """
    if anchor == end:
        raise ValueError("anchor must differ from end")
    return _end_limit(fn, anchor, end, max(1.0, abs(anchor)))
