"""Transformation properties that build new pairs from known ones.

Each property maps a pair ``(f, g)`` to ``(F, G)`` with ``G`` the Legendre
transform of ``F``:

========== ============================== ==========================================
id         F(x)                           G(m)
========== ============================== ==========================================
scaleout   a f(x)                         a g(m/a)
scalein    f(a x)                         g(m/a)
fpa        f(x) + a                       g(m) - a
shiftin    f(x + a)                       g(m) - a m
combo      c f(s x + t) + b x + a         c g((m-b)/(c s)) - t (m-b)/s - a
inverse    f^-1(x)                        -m g(1/m)
derivative f'(x)                          m h(m) - f'(h(m)),  h = (f'')^-1
integral   int_a^x f(t) dt                m h(m) - int_a^h(m) f,  h = f^-1
sumfs      (f1 [] f2)(x)                  g1(m) + g2(m)
px2        f(x) + x^2/2                   g(m) [] m^2/2
even       f(-x)                          g(-m)
odd        -f(-x)                         -g(m)
========== ============================== ==========================================

``[]`` is infimal convolution.  ``even`` and ``odd`` build the reflected
branch: for an even ``f`` the reflection is ``f`` itself, so ``g`` is even;
for an odd ``f`` the two branches share an m-domain and their transforms
differ in sign.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Any, Callable, Mapping

from ..errors import InvalidParameter
from ..funcspace import (
    AffineArgBody,
    CombineBody,
    ComposeBody,
    ConstBody,
    IdentityBody,
    InfConvBody,
    IntegralBody,
    Interval,
    InverseBody,
    ScalarFunction,
    TransformPair,
    make_function,
    range_of_derivative,
    range_of_values,
    sampling_window,
)

PROPERTY_FORMULAS = {
    "scaleout": ("a f(x)", "a g(m/a)"),
    "scalein": ("f(a x)", "g(m/a)"),
    "fpa": ("f(x) + a", "g(m) - a"),
    "shiftin": ("f(x + a)", "g(m) - a m"),
    "combo": ("c f(s x + t) + b x + a", "c g((m-b)/(c s)) - t (m-b)/s - a"),
    "inverse": ("f^-1(x)", "-m g(1/m)"),
    "derivative": ("f'(x)", "m h(m) - f'(h(m)), h = (f'')^-1"),
    "integral": ("int_a^x f(t) dt", "m h(m) - int_a^h(m) f, h = f^-1"),
    "sumfs": ("(f1 [] f2)(x)", "g1(m) + g2(m)"),
    "px2": ("f(x) + x^2/2", "g(m) [] m^2/2"),
    "even": ("f(-x)", "g(-m)"),
    "odd": ("-f(-x)", "-g(m)"),
}

PROPERTIES = (
    "scaleout",
    "scalein",
    "fpa",
    "shiftin",
    "combo",
    "inverse",
    "derivative",
    "integral",
    "sumfs",
    "px2",
    "even",
    "odd",
)


def numeric_inverse(f: ScalarFunction, domain: Interval | None = None, value_range: Interval | None = None) -> ScalarFunction:
    """Inverse of a strictly monotone ``f`` by bracketing and Brent's method.

    The result is defined on the range of ``f`` (computed when not given).
    """
    dom = domain or f.domain
    rng = value_range or range_of_values(f, domain=dom)
    return ScalarFunction(InverseBody(f.body, dom), rng, f"inverse of {f.label or f.describe()}")


def _num(params: Mapping[str, Any], key: str, default: float | None = None) -> float:
    if key not in params:
        if default is None:
            raise InvalidParameter(f"missing parameter {key!r}")
        return default
    v = float(params[key])
    if not math.isfinite(v):
        raise InvalidParameter(f"parameter {key!r} must be finite")
    return v


def _as_function(spec: Any, domain: Interval, variable: str, label: str) -> ScalarFunction:
    if isinstance(spec, ScalarFunction):
        return spec.with_domain(domain, spec.label or label)
    return make_function(str(spec), domain, label, variable=variable)


def _affine(body, a: float, b: float):
    """body(a*x + b)"""
    return AffineArgBody(body, a, b)


def _fn(body, domain: Interval, label: str) -> ScalarFunction:
    return ScalarFunction(body, domain, label)


def _new(entry: TransformPair, prop: str, f_body, g_body, x_dom, m_dom, g_dom=None, note="") -> TransformPair:
    eid = f"{entry.entry_id}|{prop}"
    g_dom = g_dom or m_dom
    return replace(
        entry,
        entry_id=eid,
        f=_fn(f_body, x_dom, eid + ":f"),
        g=_fn(g_body, g_dom, eid + ":g"),
        x_domain=x_dom,
        m_domain=m_dom,
        f_text=f"{prop}({entry.f_text})",
        g_text=f"{prop}({entry.g_text})",
        notes=note,
    )


def _linear(slope: float, offset: float):
    return CombineBody("+", CombineBody("*", ConstBody(slope), IdentityBody()), ConstBody(offset))


def _combine(op, a, b):
    return CombineBody(op, a, b)


def _scaleout(e, p):
    a = _num(p, "a")
    if a == 0:
        raise InvalidParameter("scaleout needs a != 0")
    f = _combine("*", ConstBody(a), e.f.body)
    g = _combine("*", ConstBody(a), _affine(e.g.body, 1.0 / a, 0.0))
    return _new(e, "scaleout", f, g, e.x_domain, e.m_domain.affine_image(a), e.g.domain.affine_image(a))


def _scalein(e, p):
    a = _num(p, "a")
    if a == 0:
        raise InvalidParameter("scalein needs a != 0")
    f = _affine(e.f.body, a, 0.0)
    g = _affine(e.g.body, 1.0 / a, 0.0)
    return _new(e, "scalein", f, g, e.x_domain.affine_image(1.0 / a), e.m_domain.affine_image(a), e.g.domain.affine_image(a))


def _fpa(e, p):
    a = _num(p, "a")
    f = _combine("+", e.f.body, ConstBody(a))
    g = _combine("-", e.g.body, ConstBody(a))
    return _new(e, "fpa", f, g, e.x_domain, e.m_domain, e.g.domain)


def _shiftin(e, p):
    a = _num(p, "a")
    f = _affine(e.f.body, 1.0, a)
    g = _combine("-", e.g.body, _linear(a, 0.0))
    return _new(e, "shiftin", f, g, e.x_domain.affine_image(1.0, -a), e.m_domain, e.g.domain)


def _combo(e, p):
    c, s = _num(p, "c", 1.0), _num(p, "s", 1.0)
    t, b, a = _num(p, "t", 0.0), _num(p, "b", 0.0), _num(p, "a", 0.0)
    if c == 0 or s == 0:
        raise InvalidParameter("combo needs c != 0 and s != 0")
    f = _combine("+", _combine("*", ConstBody(c), _affine(e.f.body, s, t)), _linear(b, a))
    u = (1.0 / (c * s), -b / (c * s))  # (m - b)/(c s)
    g = _combine(
        "-",
        _combine("*", ConstBody(c), _affine(e.g.body, *u)),
        _linear(t / s, -t * b / s + a),
    )
    x_dom = e.x_domain.affine_image(1.0 / s, -t / s)
    return _new(e, "combo", f, g, x_dom, e.m_domain.affine_image(c * s, b), e.g.domain.affine_image(c * s, b))


def _inverse(e, p):
    new_x = range_of_values(e.f, domain=e.x_domain)
    if "inverse" in p:
        inv = _as_function(p["inverse"], new_x, "x", "inverse")
    else:
        inv = numeric_inverse(e.f, e.x_domain, new_x)
    if e.m_domain.contains(0.0):
        raise InvalidParameter("inverse needs an m-domain excluding 0")
    recip = _combine("/", ConstBody(1.0), IdentityBody())
    g = _combine("*", _linear(-1.0, 0.0), ComposeBody(e.g.body, recip))
    return _new(e, "inverse", inv.body, g, new_x, e.m_domain.reciprocal_image())


def _derivative(e, p):
    fp = e.f.derivative()
    new_m = range_of_derivative(fp, domain=e.x_domain)
    if "h" in p:
        h = _as_function(p["h"], new_m, "m", "h")
    else:
        fpp = fp.derivative().with_domain(e.x_domain)
        h = numeric_inverse(fpp, e.x_domain, new_m)
    g = _combine("-", _combine("*", IdentityBody(), h.body), ComposeBody(fp.body, h.body))
    return _new(e, "derivative", fp.body, g, e.x_domain, new_m)


def _default_lower(dom: Interval) -> float:
    if dom.contains(0.0):
        return 0.0
    if math.isfinite(dom.lo):
        return dom.lo
    lo, hi = sampling_window(dom)
    return hi


def _integral(e, p):
    a = _num(p, "a", _default_lower(e.x_domain))
    tol = _num(p, "quad_tol", 1e-10)
    new_m = range_of_values(e.f, domain=e.x_domain)
    if "inverse" in p:
        h = _as_function(p["inverse"], new_m, "m", "inverse")
    else:
        h = numeric_inverse(e.f, e.x_domain, new_m)
    F = IntegralBody(e.f.body, a, tol)
    g = _combine("-", _combine("*", IdentityBody(), h.body), ComposeBody(F, h.body))
    return _new(e, "integral", F, g, e.x_domain, new_m)


def _sumfs(e, p):
    other = p.get("other", e)
    if not isinstance(other, TransformPair):
        from . import lookup

        other = lookup(str(other))
    f = InfConvBody(e.f.body, other.f.body, e.x_domain, other.x_domain)
    g = _combine("+", e.g.body, other.g.body)
    return _new(e, "sumfs", f, g, e.x_domain.minkowski_sum(other.x_domain), e.m_domain.intersect(other.m_domain))


def _px2(e, p):
    half_sq = make_function("x^2/2")
    f = _combine("+", e.f.body, half_sq.body)
    g = InfConvBody(e.g.body, half_sq.body, e.g.domain, Interval())
    return _new(e, "px2", f, g, e.x_domain, e.m_domain.minkowski_sum(e.x_domain), Interval())


def _even(e, p):
    f = _affine(e.f.body, -1.0, 0.0)
    g = _affine(e.g.body, -1.0, 0.0)
    return _new(e, "even", f, g, e.x_domain.affine_image(-1.0), e.m_domain.affine_image(-1.0), e.g.domain.affine_image(-1.0))


def _odd(e, p):
    f = _combine("*", ConstBody(-1.0), _affine(e.f.body, -1.0, 0.0))
    g = _combine("*", ConstBody(-1.0), e.g.body)
    return _new(e, "odd", f, g, e.x_domain.affine_image(-1.0), e.m_domain, e.g.domain)


_RULES: dict[str, Callable[[TransformPair, Mapping[str, Any]], TransformPair]] = {
    "scaleout": _scaleout,
    "scalein": _scalein,
    "fpa": _fpa,
    "shiftin": _shiftin,
    "combo": _combo,
    "inverse": _inverse,
    "derivative": _derivative,
    "integral": _integral,
    "sumfs": _sumfs,
    "px2": _px2,
    "even": _even,
    "odd": _odd,
}


def apply_property(entry: TransformPair, property_id: str, params: Mapping[str, Any] | None = None) -> TransformPair:
    """Apply one transformation property to a pair.

    ``params`` holds the property's constants (``a``; ``c, s, t, b, a`` for
    combo).  ``inverse``, ``derivative`` and ``integral`` accept a
    caller-supplied function (``inverse``: f^-1, ``h``: (f'')^-1) as text or
    :class:`ScalarFunction`; without one, a numeric inverse is used.
    ``sumfs`` takes ``other`` (a pair or catalog id; default the entry itself).
    """
    if property_id not in _RULES:
        raise InvalidParameter(f"unknown property {property_id!r}; expected one of {', '.join(PROPERTIES)}")
    if not entry.evaluable:
        raise InvalidParameter(f"entry {entry.entry_id} has no evaluable functions")
    return _RULES[property_id](entry, dict(params or {}))
