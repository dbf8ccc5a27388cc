"""Command-line front end: ``legendre <command> ...``.

Exit status: 0 on success, 1 when a verification fails, 2 on usage or
domain errors.  Numbers are printed in shortest round-trip form.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import catalog
from .config import DEFAULT, FORMATS, Config
from .errors import InvalidParameter, LegendreError
from .funcspace import (
    Interval,
    ScalarFunction,
    interior_samples,
    make_function,
    range_of_derivative,
    sampling_window,
)
from .jets import dual_jet_of
from .transform import (
    clairaut_singular_solution,
    convert_dual_coordinates,
    discrete_conjugate,
    integral_transform,
    method1_explicit,
    parametric_dual,
)
from .verify import reports_to_json, reports_to_table, verify_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# ---------------------------------------------------------------------------
# output


def fmt_num(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def emit_rows(headers: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps([dict(zip(headers, map(_json_value, r))) for r in rows], indent=2) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(headers)
        for r in rows:
            w.writerow([fmt_num(v) for v in r])
        out.write(buf.getvalue())
    else:
        cells = [list(headers)] + [[fmt_num(v) for v in r] for r in rows]
        widths = [max(len(c[i]) for c in cells) for i in range(len(headers))]
        for c in cells:
            out.write("  ".join(s.rjust(w) for s, w in zip(c, widths)).rstrip() + "\n")


def emit_record(record: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(_json_value(record), indent=2) + "\n")
    elif fmt == "csv":
        emit_rows(["field", "value"], [(k, _flat(v)) for k, v in record.items()], "csv", out)
    else:
        width = max(len(k) for k in record)
        for k, v in record.items():
            out.write(f"{k.ljust(width)}  {_flat(v)}\n")


def _flat(v: Any) -> str:
    if isinstance(v, dict):
        return ", ".join(f"{k}={_flat(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_flat(x) for x in v) + "]"
    return fmt_num(v)


# ---------------------------------------------------------------------------
# argument helpers


def parse_domain(text: str | None) -> Interval:
    """``lo:hi`` (open ends, ``inf`` allowed) or interval notation like ``[0, 1)``."""
    if text is None or text.strip() == "":
        return Interval()
    t = text.strip()
    if t[0] in "([":
        return Interval.parse(t)
    if ":" not in t:
        raise InvalidParameter(f"domain {text!r} is not lo:hi or interval notation")
    lo, hi = t.split(":", 1)
    return Interval(_number(lo or "-inf"), _number(hi or "inf"), False, False)


def _number(text: str) -> float:
    from .expr import eval as eval_expr
    from .expr import parse

    s = text.strip().lower()
    if s in ("inf", "+inf"):
        return math.inf
    if s == "-inf":
        return -math.inf
    return eval_expr(parse(text, "_"), 0.0)


def _numbers(values: Sequence[str] | None) -> list[float]:
    out: list[float] = []
    for v in values or []:
        out.extend(_number(p) for p in v.split(",") if p.strip())
    return out


def _params(items: Sequence[str] | None) -> dict[str, float]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InvalidParameter(f"parameter {item!r} is not name=value")
        k, v = item.split("=", 1)
        out[k.strip()] = _number(v)
    return out


def _config(args) -> Config:
    return DEFAULT.updated(
        grid_size=getattr(args, "grid", None),
        quad_tol=getattr(args, "quad_tol", None),
        pass_tol=getattr(args, "tol", None),
        output_format=getattr(args, "format", None),
        seed=getattr(args, "seed", None),
    )


def _window(dom: Interval) -> tuple[float, float]:
    lo, hi = sampling_window(dom)
    return lo, hi


# ---------------------------------------------------------------------------
# commands


def _default_m_values(f: ScalarFunction, n: int) -> list[float]:
    rng = range_of_derivative(f, max(2, n), f.domain)
    lo, hi = _window(rng)
    return list(interior_samples(Interval.open(lo, hi), n))


def _monotone_slope_inverse(f: ScalarFunction) -> ScalarFunction | None:
    """Numeric ``(f')^-1`` when ``f''`` keeps one sign on sampled points."""
    xs = interior_samples(f.domain, 257)
    curv = f.series(xs, 2)[2]
    if not (np.all(curv > 0) or np.all(curv < 0)):
        return None
    return catalog.numeric_inverse(f.derivative(), f.domain, range_of_derivative(f, 2048, f.domain))


def cmd_transform(args, cfg: Config, out) -> int:
    dom = parse_domain(args.domain)
    f = make_function(args.expr, dom, args.expr)
    method = args.method
    if method == "parametric":
        xs = interior_samples(dom, args.points) if args.x is None else _numbers(args.x)
        sample = parametric_dual(f, xs)
        if sample.metadata.get("degenerate"):
            print("warning: f has a single slope; its dual curve is one point", file=sys.stderr)
        for x, reason in sample.skipped:
            print(f"warning: skipped x={x!r}: {reason}", file=sys.stderr)
        emit_rows(["x", "m", "d"], sample.points, cfg.output_format, out)
        return EXIT_OK
    ms = _numbers(args.at) or _default_m_values(f, args.points)
    if method == "auto":
        inv = _monotone_slope_inverse(f)
        method = "explicit" if inv is not None else "sup"
    rows = []
    if method == "explicit":
        for m in ms:
            rows.append((m, method1_explicit(f, inv, m)))
    elif method == "sup":
        lo, hi = _window(dom)
        x = np.linspace(lo, hi, cfg.grid_size)
        mode = "inf" if args.inf else "sup"
        rows = discrete_conjugate(f, x, ms, mode=mode)
    elif method == "integral":
        inv = _monotone_slope_inverse(f)
        if inv is None:
            raise InvalidParameter("integral method needs f' monotone on the domain")
        lo, hi = _window(dom)
        x0 = 0.5 * (lo + hi) if args.x0 is None else args.x0
        s = f.series(np.array([x0]), 1)[:, 0]
        m0, g0 = float(s[1]), float(x0 * s[1] - s[0])
        for m in ms:
            rows.append((m, integral_transform(inv, m0, g0, m, cfg.quad_tol)))
    emit_rows(["m", "g"], rows, cfg.output_format, out)
    return EXIT_OK


def cmd_verify(args, cfg: Config, out) -> int:
    terms = [t for t in (args.filter,) if t]
    if args.part:
        terms.append(f"part={args.part}")
    if args.id:
        terms.append(f"id={args.id}")
    reports = verify_all(",".join(terms), cfg, draws=args.draws, theorem1=args.theorem1)
    if cfg.output_format == "json":
        out.write(reports_to_json(reports) + "\n")
    elif cfg.output_format == "csv":
        headers = ["entry_id", "status", "max_abs_residual", "n_points", "m_domain_match",
                   "curvature_check_max_dev", "involution_max_dev", "tolerance", "parameters", "diagnostics"]
        rows = [[getattr(r, h) if h != "parameters" else json.dumps(r.parameters) for h in headers] for r in reports]
        emit_rows(headers, rows, "csv", out)
    else:
        out.write(reports_to_table(reports) + "\n")
        n_fail = sum(r.status == "fail" for r in reports)
        n_skip = sum(r.status == "skipped" for r in reports)
        out.write(f"{len(reports)} reports: {len(reports) - n_fail - n_skip} pass, {n_fail} fail, {n_skip} skipped\n")
    return EXIT_FAIL if any(r.status == "fail" for r in reports) else EXIT_OK


def _entry_record(e) -> dict:
    rec = {
        "id": e.entry_id,
        "part": e.part,
        "name": e.name,
        "f": e.f_text,
        "g": e.g_text,
        "x_domain": str(e.x_domain),
        "m_domain": str(e.m_domain),
        "parameters": dict(e.parameters),
        "parameter_ranges": {k: list(v) for k, v in e.parameter_ranges.items()},
        "verified": e.verified,
    }
    if e.quadrature:
        rec["quadrature"] = True
    if e.audit:
        rec["audit"] = True
    if e.notes:
        rec["notes"] = e.notes
    if not e.verified:
        rec["status"] = "unverified: special function out of scope"
    return rec


def cmd_catalog(args, cfg: Config, out) -> int:
    if args.action == "list":
        rows = []
        for eid in catalog.entry_ids():
            raw = catalog.raw_entry(eid)
            if args.part and raw["part"] != args.part:
                continue
            rows.append((eid, raw["part"], raw.get("name", ""), "yes" if raw.get("verified", True) else "no"))
        emit_rows(["id", "part", "name", "verified"], rows, cfg.output_format, out)
        return EXIT_OK
    if args.action == "properties":
        rows = [(k, *catalog.PROPERTY_FORMULAS[k]) for k in catalog.PROPERTIES]
        emit_rows(["property", "F(x)", "G(m)"], rows, cfg.output_format, out)
        return EXIT_OK
    if not args.id:
        raise InvalidParameter("catalog show needs an entry id")
    e = catalog.lookup(args.id, _params(args.param), cfg.quad_tol)
    emit_record(_entry_record(e), cfg.output_format, out)
    return EXIT_OK


def cmd_jet(args, cfg: Config, out) -> int:
    f = make_function(args.expr, parse_domain(args.domain), args.expr)
    jet = dual_jet_of(f, args.x0, args.order, cfg.curvature_eps)
    rows = [(k, c, jet.derivative(k)) for k, c in enumerate(jet.coeffs)]
    if cfg.output_format == "json":
        out.write(json.dumps({"m0": jet.basepoint, "coefficients": list(jet.coeffs),
                              "derivatives": jet.derivatives()}, indent=2) + "\n")
        return EXIT_OK
    if cfg.output_format == "table":
        out.write(f"m0 = {fmt_num(jet.basepoint)}\n")
    emit_rows(["k", "coefficient", "derivative"], rows, cfg.output_format, out)
    return EXIT_OK


def cmd_clairaut(args, cfg: Config, out) -> int:
    dom = parse_domain(args.domain)
    h = make_function(args.h_expr, dom, args.h_expr, variable="m")
    lo, hi = parse_domain(args.m_range).lo, parse_domain(args.m_range).hi
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise InvalidParameter("--m-range needs finite lo < hi")
    ms = np.linspace(lo, hi, args.points)
    sample = clairaut_singular_solution(h, ms)
    rows = [(x, y, m) for (x, m, _), (_, y) in zip(sample.points, sample.metadata["envelope"])]
    if sample.metadata["degenerate"]:
        print("warning: h is linear; every general solution passes through one point", file=sys.stderr)
    emit_rows(["x", "y", "m"], rows, cfg.output_format, out)
    return EXIT_OK


def _branches(f: ScalarFunction, xs: np.ndarray) -> list[tuple[int, float, float, float]]:
    """Parametric dual rows labelled by branch; a new branch starts where
    the curvature of ``f`` changes sign (a cusp of the dual curve)."""
    sample = parametric_dual(f, xs)
    pts = sample.points
    if not pts:
        return []
    curv = f.series(np.array([p[0] for p in pts]), 2)[2]
    rows, branch, sign = [], 0, np.sign(curv[0])
    for p, c in zip(pts, curv):
        s = np.sign(c)
        if s != 0 and sign != 0 and s != sign:
            branch += 1
        if s != 0:
            sign = s
        rows.append((branch, *p))
    return rows


def cmd_plotdata(args, cfg: Config, out) -> int:
    if args.entry:
        if args.entry in catalog.figure_ids():
            f, dom, _ = catalog.figure(args.entry)
        else:
            e = catalog.lookup(args.entry)
            if not e.evaluable:
                raise InvalidParameter(f"{args.entry} is unverified; no functions to sample")
            f, dom = e.f, e.x_domain
    elif args.expr:
        dom = parse_domain(args.domain)
        f = make_function(args.expr, dom, args.expr)
    else:
        raise InvalidParameter("plotdata needs --entry or --expr")
    xs = interior_samples(dom, args.points)
    fmt = cfg.output_format if cfg.output_format != "table" else "csv"
    emit_rows(["branch", "x", "m", "d"], _branches(f, xs), fmt, out)
    return EXIT_OK


def cmd_convert(args, cfg: Config, out) -> int:
    a, b = convert_dual_coordinates((args.m, args.d), args.to)
    names = {"mb": ("m", "b"), "uv": ("u", "v")}[args.to]
    emit_rows(list(names), [(a, b)], cfg.output_format, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--grid", type=int, default=d, help=f"grid size for sup transforms (default {DEFAULT.grid_size})")
    g.add_argument("--quad-tol", type=float, default=d, help=f"absolute quadrature tolerance (default {DEFAULT.quad_tol})")
    g.add_argument("--tol", type=float, default=d, help=f"verification pass tolerance (default {DEFAULT.pass_tol})")
    g.add_argument("--format", choices=FORMATS, default=d, help="output format (default table)")
    g.add_argument("--seed", type=int, default=d, help="seed for randomized parameter draws")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="legendre", description="Legendre transform toolkit")
    _global_options(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        _global_options(sp, suppress=True)
        return sp

    t = add("transform", "transform an expression in x")
    t.add_argument("expr")
    t.add_argument("--domain", help="lo:hi or interval notation; default the real line")
    t.add_argument("--method", choices=["auto", "sup", "integral", "parametric"], default="auto")
    t.add_argument("--at", action="append", help="slope values m (comma separated, repeatable)")
    t.add_argument("--x", action="append", help="x values for --method parametric")
    t.add_argument("--points", type=int, default=21, help="number of output points when --at/--x is absent")
    t.add_argument("--x0", type=float, help="anchor point for --method integral")
    t.add_argument("--inf", action="store_true", help="take the infimum (concave f) with --method sup")
    t.set_defaults(run=cmd_transform)

    v = add("verify", "verify catalog entries")
    v.add_argument("--filter", help="e.g. part=c or id=c.* (comma separated)")
    v.add_argument("--part")
    v.add_argument("--id")
    v.add_argument("--draws", type=int, default=0, help="random parameter draws per parametric entry")
    v.add_argument("--theorem1", action="store_true", help="also check curvature reciprocity and involution")
    v.set_defaults(run=cmd_verify)

    c = add("catalog", "list or show catalog entries, or list the transformation properties")
    c.add_argument("action", choices=["list", "show", "properties"])
    c.add_argument("id", nargs="?")
    c.add_argument("--part")
    c.add_argument("--param", action="append", help="name=value override for show")
    c.set_defaults(run=cmd_catalog)

    j = add("jet", "Taylor jet of the transform at m0 = f'(x0)")
    j.add_argument("expr")
    j.add_argument("--x0", type=float, required=True)
    j.add_argument("--order", type=int, default=4)
    j.add_argument("--domain")
    j.set_defaults(run=cmd_jet)

    cl = add("clairaut", "singular solution of y = x y' + h(y')")
    cl.add_argument("h_expr", help="h as an expression in m (put -- before it if it starts with -)")
    cl.add_argument("--m-range", required=True, help="lo:hi")
    cl.add_argument("--points", type=int, default=21)
    cl.add_argument("--domain", help="domain of h")
    cl.set_defaults(run=cmd_clairaut)

    pd = add("plotdata", "dual-curve samples by branch")
    pd.add_argument("--entry", help="catalog or figure id")
    pd.add_argument("--expr")
    pd.add_argument("--domain")
    pd.add_argument("--points", type=int, default=201)
    pd.set_defaults(run=cmd_plotdata)

    cv = add("convert", "convert a dual point (m, d) to other line coordinates")
    cv.add_argument("m", type=float)
    cv.add_argument("d", type=float)
    cv.add_argument("--to", choices=["mb", "uv"], required=True)
    cv.set_defaults(run=cmd_convert)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args, cfg, out)
    except (LegendreError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
