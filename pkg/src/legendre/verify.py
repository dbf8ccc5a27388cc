"""Numerical verification of transform pairs.

The central test: for a correct pair ``x f'(x) - f(x) - g(f'(x))`` vanishes
identically, and the sampled range of ``f'`` matches the stored m-domain.
"""

from __future__ import annotations

import fnmatch
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import catalog
from .config import DEFAULT, Config
from .errors import InvalidParameter, LegendreError
from .funcspace import Interval, TransformPair, interior_samples, range_of_derivative, sampling_window
from .transform import conjugate_values

__all__ = [
    "VerificationReport",
    "parse_filter",
    "reports_to_json",
    "reports_to_table",
    "residual_sweep",
    "theorem1_checks",
    "verify_all",
]

NAN = math.nan
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class VerificationReport:
    entry_id: str
    max_abs_residual: float
    n_points: int
    m_domain_match: bool
    curvature_check_max_dev: float
    involution_max_dev: float
    status: str  # pass, fail or skipped
    tolerance: float = NAN
    parameters: dict = field(default_factory=dict)
    diagnostics: str = ""

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, float) and not math.isfinite(v):
                out[k] = None if math.isnan(v) else repr(v)
        return out


def _tolerance(pair: TransformPair, config: Config) -> float:
    return config.quad_pass_tol if pair.quadrature else config.pass_tol


def residual_sweep(pair: TransformPair, n: int = 1000, config: Config = DEFAULT) -> VerificationReport:
    """Max ``|x f'(x) - f(x) - g(f'(x))|`` over ``n`` interior points plus the
    m-domain check (sampled range of ``f'`` against ``pair.m_domain``)."""
    tol = _tolerance(pair, config)
    base = dict(entry_id=pair.entry_id, parameters=dict(pair.parameters), tolerance=tol)
    if not pair.evaluable:
        return VerificationReport(
            max_abs_residual=NAN,
            n_points=0,
            m_domain_match=False,
            curvature_check_max_dev=NAN,
            involution_max_dev=NAN,
            status="skipped",
            diagnostics="unverified: special function out of scope",
            **base,
        )
    x = interior_samples(pair.x_domain, n)
    notes = []
    try:
        r = float(np.max(np.abs(pair.residual(x))))
    except LegendreError as exc:
        r = NAN
        notes.append(f"residual: {type(exc).__name__}: {exc}")
    try:
        found = range_of_derivative(pair.f, config.range_samples, pair.x_domain)
        match = found.approx_equal(pair.m_domain, 1e-6)
        if not match:
            notes.append(f"m-domain: sampled {found}, stored {pair.m_domain}")
    except LegendreError as exc:
        match = False
        notes.append(f"m-domain: {type(exc).__name__}: {exc}")
    ok = r <= tol and match
    if not r <= tol and math.isfinite(r):
        notes.append(f"residual {r:.3g} exceeds {tol:.3g}")
    return VerificationReport(
        max_abs_residual=r,
        n_points=n,
        m_domain_match=match,
        curvature_check_max_dev=NAN,
        involution_max_dev=NAN,
        status="pass" if ok else "fail",
        diagnostics="; ".join(notes),
        **base,
    )


@dataclass(frozen=True)
class Theorem1Result:
    slope_dev: float  # max relative |g'(m) - x| by central differences
    curvature_dev: float  # max |g''(m) f''(x) - 1|
    involution_dev: float  # max |f_rec(x) - f(x)| from the discrete transform of g
    involution_bound: float
    n_points: int
    n_singular: int  # points excluded for |f''| < eps
    n_slope_skipped: int = 0  # points where the difference quotient is ill-conditioned


def _involution(pair: TransformPair, probes: np.ndarray, grid: int) -> tuple[float, float]:
    """Transform sampled ``g`` back and compare with ``f`` at the probes.

    The m-grid is the image under ``f'`` of a uniform x-grid a little wider
    than the probes; ``g`` itself is evaluated only through its own formula.
    Discretization error is at most ``f'' dx^2 / 8`` per probe.
    """
    lo, hi = float(probes[0]), float(probes[-1])
    pad = 0.05 * (hi - lo)
    xg = np.linspace(lo - pad, hi + pad, grid)
    xg = xg[[pair.x_domain.interior_contains(float(t)) for t in xg]]
    s = pair.f.derivative().series(xg, 1)  # skips quadrature for integral-defined f
    m, curv = s[0], s[1]
    if np.all(curv > 0):
        mode = "sup"
    elif np.all(curv < 0):
        mode = "inf"
    else:
        return NAN, NAN
    order = np.argsort(m, kind="stable")
    m = m[order]
    gm = pair.g(m)
    rec, _, _ = conjugate_values(m, gm, probes, mode)
    dev = float(np.max(np.abs(rec - pair.f(probes))))
    dx = float(np.max(np.diff(xg)))
    bound = 5.0 * float(np.max(np.abs(curv))) * dx * dx / 8.0
    scale = float(np.max(np.abs(pair.f(probes)))) + 1.0
    return dev, bound + 1e-12 * scale


def theorem1_checks(pair: TransformPair, n: int = 100, config: Config = DEFAULT) -> Theorem1Result:
    """Slope duality, curvature reciprocity and involution at ``n`` points.

    Points sit in the central half of the x sampling window, away from
    endpoint singularities.
    """
    if not pair.evaluable:
        raise InvalidParameter(f"entry {pair.entry_id} has no evaluable functions")
    lo, hi = sampling_window(pair.x_domain)
    q = 0.25 * (hi - lo)
    x = interior_samples(Interval.open(lo + q, hi - q), n)
    fs = pair.f.series(x, 2)
    m, f2 = fs[1], 2.0 * fs[2]
    good = np.abs(f2) >= config.curvature_eps
    n_sing = int(np.count_nonzero(~good))
    xs, ms, f2s = x[good], m[good], f2[good]
    if len(xs) == 0:
        return Theorem1Result(NAN, NAN, NAN, NAN, 0, n_sing, 0)
    gs = pair.g.series(ms, 2)
    curvature = float(np.max(np.abs(2.0 * gs[2] * f2s - 1.0)))
    slope_devs = []
    n_slope_skipped = 0
    for xi, mi, ci in zip(xs, ms, f2s):
        # x moves by about 1e-4 relative, so truncation is near 1e-8
        h = 1e-4 * abs(ci) * max(1.0, abs(xi))
        if not (pair.g.domain.interior_contains(mi - h) and pair.g.domain.interior_contains(mi + h)):
            n_slope_skipped += 1
            continue
        gp, gm = float(pair.g(mi + h)), float(pair.g(mi - h))
        if _EPS * (1.0 + abs(gp) + abs(gm)) / h > 1e-7 * max(1.0, abs(xi)):
            n_slope_skipped += 1  # difference quotient drowned in rounding
            continue
        slope_devs.append(abs((gp - gm) / (2.0 * h) - xi) / max(1.0, abs(xi)))
    slope = max(slope_devs) if slope_devs else NAN
    inv, bound = _involution(pair, xs, config.grid_size)
    return Theorem1Result(slope, curvature, inv, bound, len(xs), n_sing, n_slope_skipped)


def parse_filter(text: str | None) -> dict[str, str]:
    """``"part=c,id=c.*"`` -> ``{"part": "c", "id": "c.*"}``; ids accept globs."""
    out: dict[str, str] = {}
    for item in (text or "").split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise InvalidParameter(f"filter term {item!r} is not key=value")
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in ("part", "id"):
            raise InvalidParameter(f"unknown filter key {k!r}; use part or id")
        out[k] = v
    return out


def _selected(raw: dict, flt: dict[str, str]) -> bool:
    if "part" in flt and raw["part"] != flt["part"]:
        return False
    if "id" in flt and not fnmatch.fnmatchcase(raw["id"], flt["id"]):
        return False
    return True


def verify_all(
    filter: str | None = None,  # noqa: A002
    config: Config = DEFAULT,
    draws: int = 0,
    theorem1: bool = False,
) -> list[VerificationReport]:
    """One report per selected entry (and per parameter draw), sorted by id.

    ``draws`` adds randomized admissible parameter sets per parametric entry,
    seeded by ``config.seed``.  With ``theorem1`` the curvature and
    involution deviations are filled in and count toward the status.
    """
    flt = parse_filter(filter)
    rng = np.random.default_rng(config.seed)
    reports = []
    for eid in sorted(catalog.entry_ids()):
        raw = catalog.raw_entry(eid)
        if not _selected(raw, flt):
            continue
        sets: list[dict] = [{}]
        if draws and raw.get("parameters") and raw.get("verified", True):
            sets += catalog.draw_parameters(eid, rng, draws)
        for params in sets:
            pair = catalog.lookup(eid, params, config.quad_tol)
            rep = residual_sweep(pair, config.sweep_points, config)
            if theorem1 and rep.status != "skipped":
                rep = _with_theorem1(rep, pair, config)
            reports.append(rep)
    return reports


def _with_theorem1(rep: VerificationReport, pair: TransformPair, config: Config) -> VerificationReport:
    from dataclasses import replace

    try:
        t = theorem1_checks(pair, 100, config)
    except LegendreError as exc:
        return replace(rep, status="fail", diagnostics=_join(rep.diagnostics, f"theorem 1: {exc}"))
    notes = rep.diagnostics
    ok = rep.status == "pass"
    if not t.curvature_dev <= 1e-8:
        ok = False
        notes = _join(notes, f"curvature deviation {t.curvature_dev:.3g}")
    if math.isfinite(t.involution_dev) and not t.involution_dev <= t.involution_bound:
        ok = False
        notes = _join(notes, f"involution deviation {t.involution_dev:.3g} > {t.involution_bound:.3g}")
    return replace(
        rep,
        curvature_check_max_dev=t.curvature_dev,
        involution_max_dev=t.involution_dev,
        status="pass" if ok else "fail",
        diagnostics=notes,
    )


def _join(a: str, b: str) -> str:
    return f"{a}; {b}" if a else b


def reports_to_json(reports: list[VerificationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


def reports_to_table(reports: list[VerificationReport]) -> str:
    rows = [f"{'entry':<24} {'status':<8} {'max|residual|':>14} {'m-domain':>8}  parameters / notes"]
    for r in reports:
        res = "-" if math.isnan(r.max_abs_residual) else f"{r.max_abs_residual:.3e}"
        md = "-" if r.status == "skipped" else ("ok" if r.m_domain_match else "MISMATCH")
        params = " ".join(f"{k}={v:.6g}" for k, v in r.parameters.items())
        notes = "  ".join(s for s in (params, r.diagnostics) if s)
        rows.append(f"{r.entry_id:<24} {r.status:<8} {res:>14} {md:>8}  {notes}".rstrip())
    return "\n".join(rows)
