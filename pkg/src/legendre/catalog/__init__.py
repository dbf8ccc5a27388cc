"""Catalog of Legendre transform pairs loaded from ``entries.json``.

Formulas are stored as expression text (``f`` in ``x``, ``g`` in ``m``).
Domain endpoints are expression text too, so they may depend on the
entry's parameters.  See ``docs/catalog-schema.md`` for the schema.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

import numpy as np

from ..errors import DomainError, InvalidParameter, LegendreError, NotFound
from ..expr import eval as eval_expr
from ..expr import parse
from ..funcspace import (
    ExprBody,
    Interval,
    PiecewiseBody,
    ScalarFunction,
    TransformPair,
    make_function,
)
from .properties import PROPERTIES, PROPERTY_FORMULAS, apply_property, numeric_inverse

__all__ = [
    "PROPERTIES",
    "PROPERTY_FORMULAS",
    "all_entries",
    "apply_property",
    "branches",
    "draw_parameters",
    "entry_ids",
    "figure",
    "lookup",
    "numeric_inverse",
    "raw_entry",
    "reversed",
    "special_case_links",
]

REVERSED_SUFFIX = ".reversed"


@lru_cache(maxsize=1)
def _document() -> dict:
    text = resources.files(__package__).joinpath("entries.json").read_text(encoding="utf-8")
    return json.loads(text)


@lru_cache(maxsize=1)
def _by_id() -> dict[str, dict]:
    out = {}
    for raw in _document()["entries"]:
        if raw["id"] in out:
            raise ValueError(f"duplicate catalog id {raw['id']!r}")
        out[raw["id"]] = raw
    return out


def entry_ids() -> list[str]:
    return list(_by_id())


def raw_entry(entry_id: str) -> dict:
    try:
        return _by_id()[entry_id]
    except KeyError:
        raise NotFound(entry_id) from None


def _const(text: Any, params: Mapping[str, float]) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip().lower()
    if s in ("inf", "+inf"):
        return math.inf
    if s == "-inf":
        return -math.inf
    return eval_expr(parse(text, "_", params.keys()), 0.0, params)


def _interval(spec, params) -> Interval:
    lo, hi, lo_c, hi_c = spec
    return Interval(_const(lo, params), _const(hi, params), bool(lo_c), bool(hi_c))


def _function(spec, domain, params, variable, label, quad_tol) -> ScalarFunction:
    if isinstance(spec, str):
        return make_function(spec, domain, label, variable=variable, params=params, quad_tol=quad_tol)
    if "quad" in spec:
        return make_function("quad:" + spec["quad"], domain, label, quad_tol=quad_tol)
    pieces = tuple(
        (
            _interval(p["domain"], params),
            ExprBody(parse(p["expr"], variable, params.keys()), dict(params)),
        )
        for p in spec["pieces"]
    )
    return ScalarFunction(PiecewiseBody(pieces), domain, label)


def _text(spec) -> str:
    if isinstance(spec, str):
        return spec
    if "quad" in spec:
        return f"quad:{spec['quad']}"
    return "; ".join(f"{p['expr']} on {_interval_text(p['domain'])}" for p in spec["pieces"])


def _interval_text(spec) -> str:
    lo, hi, lo_c, hi_c = spec
    return f"{'[' if lo_c else '('}{lo}, {hi}{']' if hi_c else ')'}"


def resolve_parameters(raw: dict, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
    """Defaults, then overrides, then derived parameters in declaration order."""
    declared = raw.get("parameters", {})
    params = {k: float(v["default"]) for k, v in declared.items()}
    for k, v in (overrides or {}).items():
        if k not in declared:
            raise InvalidParameter(f"entry {raw['id']} has no parameter {k!r}")
        params[k] = float(v)
    for k, text in raw.get("derived", {}).items():
        try:
            params[k] = _const(text, params)
        except LegendreError as exc:
            raise InvalidParameter(f"derived parameter {k} = {text} undefined: {exc}") from None
        if not math.isfinite(params[k]):
            raise InvalidParameter(f"derived parameter {k} = {text} is not finite")
    return params


def build(raw: dict, overrides: Mapping[str, float] | None = None, quad_tol: float = 1e-10) -> TransformPair:
    params = resolve_parameters(raw, overrides)
    try:
        x_dom = _interval(raw["x_domain"], params)
        m_dom = _interval(raw["m_domain"], params)
        g_dom = _interval(raw["g_domain"], params) if "g_domain" in raw else m_dom
    except (ValueError, LegendreError) as exc:
        raise InvalidParameter(f"entry {raw['id']}: domain undefined for {params}: {exc}") from None
    verified = raw.get("verified", True)
    f = g = None
    if verified:
        f = _function(raw["f"], x_dom, params, "x", raw["id"] + ":f", quad_tol)
        g = _function(raw["g"], g_dom, params, "m", raw["id"] + ":g", quad_tol)
    declared = raw.get("parameters", {})
    return TransformPair(
        entry_id=raw["id"],
        f=f,
        g=g,
        x_domain=x_dom,
        m_domain=m_dom,
        part=raw["part"],
        name=raw.get("name", ""),
        f_text=raw.get("f_text") or _text(raw["f"]),
        g_text=raw.get("g_text") or _text(raw["g"]),
        parameters=params,
        parameter_ranges={k: tuple(v["range"]) for k, v in declared.items()},
        notes=raw.get("notes", ""),
        verified=verified,
        quadrature=raw.get("quadrature", False),
        audit=raw.get("audit", False),
    )


def lookup(entry_id: str, params: Mapping[str, float] | None = None, quad_tol: float = 1e-10) -> TransformPair:
    """The entry with this exact id, instantiated at defaults overridden by ``params``."""
    if entry_id.endswith(REVERSED_SUFFIX):
        return reversed(lookup(entry_id[: -len(REVERSED_SUFFIX)], params, quad_tol))
    return build(raw_entry(entry_id), params, quad_tol)


def branches(base_id: str) -> list[TransformPair]:
    """All entries whose id is ``base_id`` or ``base_id`` plus a branch suffix."""
    ids = [i for i in entry_ids() if i == base_id or i.startswith(base_id + ".")]
    if not ids:
        raise NotFound(base_id)
    return [lookup(i) for i in ids]


def all_entries(quad_tol: float = 1e-10) -> list[TransformPair]:
    return [build(raw, None, quad_tol) for raw in _document()["entries"]]


def reversed(entry: TransformPair) -> TransformPair:  # noqa: A001
    """Read the pair right to left: (g, m_domain) becomes (f, x_domain)."""
    out = entry.swapped()
    if entry.entry_id.endswith(REVERSED_SUFFIX):
        from dataclasses import replace

        out = replace(out, entry_id=entry.entry_id[: -len(REVERSED_SUFFIX)])
    return out


def draw_parameters(entry_id: str, rng: np.random.Generator, n: int = 3) -> list[dict[str, float]]:
    """``n`` parameter sets drawn uniformly from the admissible ranges.

    Draws that make a derived parameter or a domain undefined are rejected
    and redrawn.  Entries without parameters yield ``n`` empty dicts.
    """
    raw = raw_entry(entry_id)
    declared = raw.get("parameters", {})
    out: list[dict[str, float]] = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 100 * n:
            raise InvalidParameter(f"could not draw admissible parameters for {entry_id}")
        draw = {k: float(rng.uniform(*v["range"])) for k, v in declared.items()}
        try:
            build(raw, draw)
        except InvalidParameter:
            continue
        out.append(draw)
    return out


def special_case_links() -> list[tuple[str, str, dict[str, float]]]:
    """(entry id, general entry id, parameters) for entries that specialize another."""
    out = []
    for raw in _document()["entries"]:
        for key in ("special_case_of",):
            if key in raw:
                out.append((raw["id"], raw[key]["id"], dict(raw[key]["parameters"])))
    return out


def figure(figure_id: str) -> tuple[ScalarFunction, Interval, str]:
    for fig in _document().get("figures", []):
        if fig["id"] == figure_id:
            dom = _interval(fig["x_domain"], {})
            return make_function(fig["f"], dom, fig["id"]), dom, fig.get("notes", "")
    raise NotFound(figure_id)


def figure_ids() -> list[str]:
    return [fig["id"] for fig in _document().get("figures", [])]


def check_domain(entry: TransformPair, x) -> None:
    x = np.asarray(x, dtype=float)
    bad = [float(t) for t in x.reshape(-1) if not entry.x_domain.contains(float(t))]
    if bad:
        raise DomainError(f"{bad[0]!r} outside {entry.x_domain} for {entry.entry_id}")
