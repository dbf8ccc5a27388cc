"""Special functions needed by the catalog.

Lambert W is computed here with Halley's iteration.  The error-function
family, the exponential integral and the normal quantile are thin wrappers
over :mod:`scipy.special` that accept scalars or arrays and raise
:class:`DomainError` instead of returning NaN.
"""

from __future__ import annotations

import enum
import math

import numpy as np
import scipy.special as sc

from .errors import DomainError

INV_E = math.exp(-1.0)
SQRT2 = math.sqrt(2.0)


class Branch(enum.Enum):
    W0 = "principal"
    WM1 = "lower"


def _halley(x: float, w: float) -> float:
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def _near_branch_point(p: float) -> float:
    # series in p = ±sqrt(2(e x + 1)) about the branch point
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3 - 43.0 / 540.0 * p**4


def lambert_w(x: float, branch: Branch = Branch.W0) -> float:
    """Real branches of the solution ``w`` of ``w * exp(w) = x``.

    ``Branch.W0`` is defined on ``[-1/e, inf)`` and ``Branch.WM1`` on
    ``[-1/e, 0)``; both equal -1 at the branch point.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w of NaN")
    q = math.e * x + 1.0
    if q < -1e-15:
        raise DomainError(f"lambert_w undefined for x={x!r} < -1/e")
    if q <= 1e-15:
        return -1.0
    if branch is Branch.W0:
        if x == 0.0:
            return 0.0
        if math.isinf(x):
            return math.inf
        if x > 1e10:
            # Newton on w + ln w = ln x avoids overflow of exp(w)
            lx = math.log(x)
            w = lx - math.log(lx)
            for _ in range(32):
                dw = (w + math.log(w) - lx) / (1.0 + 1.0 / w)
                w -= dw
                if abs(dw) <= 4e-16 * w:
                    break
            return w
        if x < -0.25:
            w = _near_branch_point(math.sqrt(2.0 * q))
        elif x < 3.0:
            w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
        else:
            lx = math.log(x)
            w = lx - math.log(lx)
        return _halley(x, w)
    if x >= 0.0:
        raise DomainError(f"lower branch of lambert_w undefined for x={x!r} >= 0")
    if x < -0.25:
        w = _near_branch_point(-math.sqrt(2.0 * q))
    else:
        l1 = math.log(-x)
        w = l1 - math.log(-l1)
    return _halley(x, w)


def lambert_w_exp(u: float) -> float:
    """Principal branch ``W0(exp(u))`` without forming ``exp(u)``."""
    u = float(u)
    if math.isnan(u):
        raise DomainError("lambert_w_exp of NaN")
    if u < 20.0:
        return lambert_w(math.exp(u), Branch.W0)
    # Newton on w + ln w = u
    w = u - math.log(u)
    for _ in range(32):
        dw = (w + math.log(w) - u) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 4e-16 * w:
            break
    return w


def lambert_w_array(x, branch: Branch = Branch.W0) -> np.ndarray:
    """Elementwise :func:`lambert_w` over an array."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    flat = out.reshape(-1)
    for i, xi in enumerate(x.reshape(-1)):
        flat[i] = lambert_w(xi, branch)
    return out


def _scalar(fn):
    def wrapped(x):
        out = fn(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


def _check(ok, message):
    if not np.all(ok):
        raise DomainError(message)


@_scalar
def erf(x):
    return sc.erf(x)


@_scalar
def erfc(x):
    return sc.erfc(x)


@_scalar
def phi(x):
    """Standard normal cumulative distribution function."""
    return 0.5 * sc.erfc(-x / SQRT2)


@_scalar
def erfinv(y):
    _check((y > -1.0) & (y < 1.0), "erfinv undefined outside (-1, 1)")
    return sc.erfinv(y)


@_scalar
def erfcinv(y):
    _check((y > 0.0) & (y < 2.0), "erfcinv undefined outside (0, 2)")
    return sc.erfcinv(y)


@_scalar
def probit(p):
    """Quantile function of the standard normal distribution."""
    _check((p > 0.0) & (p < 1.0), "probit undefined outside (0, 1)")
    return sc.ndtri(p)


@_scalar
def expint_ei(x):
    """Exponential integral Ei(x); principal value for x > 0."""
    _check(x != 0.0, "Ei is singular at 0")
    return sc.expi(x)


@_scalar
def li(x):
    """Logarithmic integral, principal value across t = 1; li(0) = 0."""
    _check(x >= 0.0, "li undefined for negative x")
    _check(x != 1.0, "li is singular at 1")
    with np.errstate(divide="ignore"):
        return np.where(x == 0.0, 0.0, sc.expi(np.log(np.where(x == 0.0, 1.0, x))))


LI2 = li(2.0)


def offset_li(x):
    """Offset logarithmic integral Li(x) = li(x) - li(2)."""
    return li(x) - LI2
