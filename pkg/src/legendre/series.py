"""Truncated power series arithmetic.

A series of order ``n`` is a float64 array ``a`` of shape ``(n + 1, *batch)``
holding Taylor coefficients ``a[k] = f^(k)(x0) / k!``.  The trailing batch
axes let one call propagate jets at many basepoints at once.  Every routine
truncates its result to the order of its inputs.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError


def constant(value, order: int) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    out = np.zeros((order + 1,) + value.shape)
    out[0] = value
    return out


def variable(x0, order: int) -> np.ndarray:
    out = constant(x0, order)
    if order >= 1:
        out[1] = 1.0
    return out


def _conv(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """Coefficient k of a*b using terms a[0..k], b[0..k]."""
    return np.einsum("i...,i...->...", a[: k + 1], b[k::-1])


def _conv_tail(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """sum_{j=1..k} a[j] * b[k-j]"""
    if k == 0:
        return np.zeros(a.shape[1:])
    return np.einsum("i...,i...->...", a[1 : k + 1], b[k - 1 :: -1])


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape)
    for k in range(n):
        out[k] = _conv(a, b, k)
    return out


def div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if np.any(b[0] == 0.0):
        raise DomainError("division by a series with zero constant term")
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape)
    for k in range(len(a)):
        out[k] = (a[k] - _conv_tail(b, out, k)) / b[0]
    return out


def reciprocal(b: np.ndarray) -> np.ndarray:
    return div(constant(np.ones(b.shape[1:]), len(b) - 1), b)


def derivative(a: np.ndarray) -> np.ndarray:
    """Series of f' at the same basepoint; one order shorter."""
    k = np.arange(1, len(a)).reshape((-1,) + (1,) * (a.ndim - 1))
    return a[1:] * k


def integral(a: np.ndarray, c0) -> np.ndarray:
    """Antiderivative with constant term ``c0``; one order longer."""
    k = np.arange(1, len(a) + 1).reshape((-1,) + (1,) * (a.ndim - 1))
    out = np.empty((len(a) + 1,) + a.shape[1:])
    out[0] = c0
    out[1:] = a / k
    return out


def compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Series of ``F(u(x))`` where ``outer`` is the jet of F at ``u(x0)``."""
    n = len(inner)
    h = inner.copy()
    h[0] = 0.0
    out = constant(outer[n - 1], n - 1)
    for k in range(n - 2, -1, -1):
        out = mul(out, h)
        out[0] += outer[k]
    return out


def revert(a: np.ndarray) -> np.ndarray:
    """Compositional inverse of a series with zero constant term.

    Returns ``b`` with ``a(b(t)) = t`` through the order of ``a``.  Needs a
    nonzero linear coefficient.
    """
    n = len(a)
    if np.any(a[0] != 0.0):
        raise ValueError("series to revert must vanish at the origin")
    if n < 2 or np.any(a[1] == 0.0):
        raise DomainError("series with zero linear term has no local inverse")
    b = np.zeros(a.shape)
    b[1] = 1.0 / a[1]
    for k in range(2, n):
        b[k] = -compose(a, b)[k] / a[1]
    return b


def exp(u: np.ndarray) -> np.ndarray:
    out = np.empty(u.shape)
    out[0] = np.exp(u[0])
    du = derivative(u)
    for k in range(1, len(u)):
        out[k] = _conv(du, out, k - 1) / k
    return out


def log(u: np.ndarray) -> np.ndarray:
    if not np.all(u[0] > 0.0):
        raise DomainError("log of nonpositive value")
    if len(u) == 1:
        return np.log(u)
    return integral(div(derivative(u), u[:-1]), np.log(u[0]))


def sin_cos(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.empty(u.shape)
    c = np.empty(u.shape)
    s[0], c[0] = np.sin(u[0]), np.cos(u[0])
    du = derivative(u)
    for k in range(1, len(u)):
        s[k] = _conv(du, c, k - 1) / k
        c[k] = -_conv(du, s, k - 1) / k
    return s, c


def sinh_cosh(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.empty(u.shape)
    c = np.empty(u.shape)
    s[0], c[0] = np.sinh(u[0]), np.cosh(u[0])
    du = derivative(u)
    for k in range(1, len(u)):
        s[k] = _conv(du, c, k - 1) / k
        c[k] = _conv(du, s, k - 1) / k
    return s, c


def power(u: np.ndarray, c: float) -> np.ndarray:
    """Series of ``u**c`` for a real constant exponent."""
    n = len(u)
    if float(c).is_integer():
        k = int(c)
        if k == 0:
            return constant(np.ones(u.shape[1:]), n - 1)
        if k < 0:
            return reciprocal(power(u, -k))
        out = None
        base = u
        while k:
            if k & 1:
                out = base if out is None else mul(out, base)
            k >>= 1
            if k:
                base = mul(base, base)
        return out
    if np.any(u[0] < 0.0):
        raise DomainError(f"non-integer power {c!r} of a negative value")
    if n == 1:
        return u**c
    if np.any(u[0] == 0.0):
        raise DomainError(f"non-integer power {c!r} is not smooth at 0")
    out = np.empty(u.shape)
    out[0] = u[0] ** c
    for k in range(1, n):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (u.ndim - 1))
        out[k] = np.sum(((c + 1.0) * j - k) * u[1 : k + 1] * out[k - 1 :: -1], axis=0) / (
            k * u[0]
        )
    return out


def from_derivative(u: np.ndarray, value, fprime: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Series of ``F(u)`` from ``F(u0)`` and a rule for the series of ``F'``.

    ``fprime(v)`` receives ``u`` truncated by one order and returns the series
    of ``F'(u(x))`` to that order.
    """
    value = np.asarray(value, dtype=float)
    if len(u) == 1:
        return np.broadcast_to(value, u.shape[1:])[None].copy()
    return integral(mul(fprime(u[:-1]), derivative(u)), value)


def implicit(u: np.ndarray, value, fprime_of_v: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Series of ``v = F(u)`` when ``F'(u)`` is known only through ``v``.

    ``fprime_of_v(v_partial)`` returns the series of ``F'(u(x))`` with the
    order of ``v_partial``.  Used for inverse functions such as Lambert W.
    """
    v = np.empty(u.shape)
    v[0] = value
    du = derivative(u)
    for k in range(1, len(u)):
        w = fprime_of_v(v[:k])
        v[k] = _conv(du, w, k - 1) / k
    return v
