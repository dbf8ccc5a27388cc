"""Legendre transform engines.

A curve ``y = f(x)`` is described dually by its tangent lines
``y = m x - d`` with ``m = f'(x)`` and ``d = g(m)``.  The engines here compute
``g`` in several independent ways:

* ``parametric_dual`` samples ``(m, d)`` directly from ``f`` and keeps every
  branch, including the non-functional duals of non-convex ``f``;
* ``method1_explicit`` uses a known inverse of ``f'``;
* ``piecewise_linear_dual`` is exact for convex polylines;
* ``integral_transform`` integrates ``(f')^-1``;
* ``discrete_conjugate`` takes ``sup_x (m x - f(x))`` over a grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .config import DEFAULT
from .errors import (
    DivisionByZero,
    DomainError,
    EmptyFeasibleSet,
    InvalidParameter,
    LegendreError,
    QuadratureFailure,
)
from .funcspace import (
    INF,
    CombineBody,
    ConstBody,
    DualCurveSample,
    IdentityBody,
    Interval,
    PiecewiseBody,
    PiecewiseLinear,
    ScalarFunction,
    one_sided_limit,
)

__all__ = [
    "TangentLine",
    "brute_force_conjugate",
    "clairaut_singular_solution",
    "conjugate_values",
    "convert_dual_coordinates",
    "discrete_conjugate",
    "extend_with_support_lines",
    "infimal_convolution",
    "integral_transform",
    "method1_explicit",
    "parametric_dual",
    "piecewise_linear_dual",
]


@dataclass(frozen=True)
class TangentLine:
    """The line ``y = m x - d``; ``d`` is the negated intercept."""

    m: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.d)):
            raise DomainError(f"tangent line needs finite coefficients, got m={self.m!r}, d={self.d!r}")

    def __call__(self, x):
        return self.m * np.asarray(x, dtype=float) - self.d

    @classmethod
    def of(cls, f: ScalarFunction, x: float) -> "TangentLine":
        """Tangent to ``f`` at ``x``."""
        s = f.series(np.array([float(x)]), 1)[:, 0]
        return cls(float(s[1]), float(x * s[1] - s[0]))


def _tangent_rows(f: ScalarFunction, xs: np.ndarray) -> np.ndarray:
    s = f.series(xs, 1)
    return np.stack([xs, s[1], xs * s[1] - s[0]], axis=1)


def parametric_dual(f: ScalarFunction, x_grid: Iterable[float]) -> DualCurveSample:
    """Points ``(x, f'(x), x f'(x) - f(x))`` in grid order.

    Grid points outside the domain of ``f``, or where ``f`` fails to
    evaluate, are skipped and listed in ``skipped`` with the reason.
    """
    xs = np.asarray(list(x_grid), dtype=float)
    skipped = []
    inside = []
    for x in xs:
        if f.domain.contains(float(x)):
            inside.append(float(x))
        else:
            skipped.append((float(x), f"outside domain {f.domain}"))
    rows: list[tuple[float, float, float]] = []
    if inside:
        arr = np.array(inside)
        try:
            rows = [tuple(map(float, r)) for r in _tangent_rows(f, arr)]
        except LegendreError:
            # locate the offending points one at a time
            for x in inside:
                try:
                    rows.append(tuple(map(float, _tangent_rows(f, np.array([x]))[0])))
                except LegendreError as exc:
                    skipped.append((x, str(exc)))
    slopes = {r[1] for r in rows}
    meta = {
        "n_requested": int(len(xs)),
        "n_points": len(rows),
        "n_skipped": len(skipped),
        "degenerate": len(rows) > 1 and len(slopes) == 1,
    }
    return DualCurveSample(tuple(rows), f.label, tuple(skipped), meta)


def method1_explicit(f: ScalarFunction, f_prime_inverse: ScalarFunction, m: float) -> float:
    """``g(m) = m x - f(x)`` with ``x = (f')^-1(m)``."""
    m = float(m)
    if not f_prime_inverse.domain.contains(m):
        raise DomainError(f"m={m!r} outside {f_prime_inverse.domain}")
    x = float(f_prime_inverse(m))
    if not f.domain.contains(x):
        raise DomainError(f"x={x!r} from the inverse slope map lies outside {f.domain}")
    return m * x - float(f(x))


def piecewise_linear_dual(p: PiecewiseLinear) -> PiecewiseLinear:
    """Exact dual of a convex polyline.

    Every piece of slope ``s`` becomes the vertex ``(s, -intercept)``; every
    vertex ``(x, y)`` becomes the segment ``d = m x - y`` over the slopes
    supported there.  A finite end ray turns into a bounded end and vice
    versa.  Arithmetic is rational, so dualizing twice returns the input
    when no vertex is redundant (collinear with its neighbours).
    """
    pts = p.breakpoints
    slopes = p.slopes()
    last = len(pts) - 1
    verts: list[tuple[Fraction, Fraction]] = []
    for k, s in enumerate(slopes):
        if isinstance(s, float):  # infinite end slope
            continue
        x, y = pts[min(max(k - 1, 0), last)]
        if verts and verts[-1][0] == s:
            continue
        verts.append((s, s * x - y))
    left = pts[0][0] if slopes[0] == -INF else -INF
    right = pts[-1][0] if slopes[-1] == INF else INF
    if not verts:
        # a single point of finite value: its dual is a line
        x, y = pts[0]
        return PiecewiseLinear(((0, -y),), x, x)
    return PiecewiseLinear(tuple(verts), left, right)


def integral_transform(
    f_prime_inverse: ScalarFunction,
    m0: float,
    g_m0: float,
    m: float,
    tol: float = DEFAULT.quad_tol,
) -> float:
    """``g(m) = g(m0) + int_m0^m (f')^-1(t) dt`` by adaptive quadrature.

    Raises QuadratureFailure when the error estimate exceeds ``tol``
    (absolute).
    """
    m0, m = float(m0), float(m)
    dom = f_prime_inverse.domain
    for v in (m0, m):
        if not (dom.contains(v) or v in (dom.lo, dom.hi)):
            raise DomainError(f"{v!r} outside {dom}")
    if m == m0:
        return float(g_m0)
    lo, hi = min(m0, m), max(m0, m)
    if not all(dom.interior_contains(t) for t in np.linspace(lo, hi, 9)[1:-1]):
        raise DomainError(f"[{lo!r}, {hi!r}] leaves {dom}")

    def h(t):
        return float(f_prime_inverse(t))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(h, m0, m, epsabs=tol, epsrel=0.0, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc).splitlines()[0]) from None
    if not err <= tol:
        raise QuadratureFailure(f"error estimate {err:.3g} exceeds {tol:.3g}")
    return float(g_m0) + val


def convert_dual_coordinates(point: Sequence[float], target: str) -> tuple[float, float]:
    """Re-express the line ``(m, d)``, i.e. ``y = m x - d``.

    ``mb``: slope and intercept ``(m, b)`` of ``y = m x + b``.
    ``uv``: line coordinates with ``u x + v y + 1 = 0``, so ``m = -u/v``
    and ``d = 1/v``.  Lines through the origin have no ``uv`` form.
    """
    m, d = (float(v) for v in point)
    if target == "mb":
        return (m, -d)
    if target == "uv":
        if d == 0.0:
            raise DivisionByZero("a line through the origin has no (u, v) coordinates")
        return (-m / d, 1.0 / d)
    raise InvalidParameter(f"unknown target {target!r}; expected 'mb' or 'uv'")


# ---------------------------------------------------------------------------
# discrete conjugation


def _exactly_convex(x: np.ndarray, fx: np.ndarray) -> bool:
    """True when the sampled points have nondecreasing chord slopes, decided
    in rational arithmetic so rounding cannot misjudge it."""
    if len(x) < 3:
        return True
    xs = [Fraction(float(v)) for v in x]
    fs = [Fraction(float(v)) for v in fx]
    dx = [b - a for a, b in zip(xs, xs[1:])]
    df = [b - a for a, b in zip(fs, fs[1:])]
    # df[i]/dx[i] <= df[i+1]/dx[i+1] with positive dx
    return all(df[i] * dx[i + 1] <= df[i + 1] * dx[i] for i in range(len(dx) - 1))


def brute_force_conjugate(x, fx, m) -> tuple[np.ndarray, np.ndarray]:
    """``max_j (m x_j - f_j)`` for every ``m`` by full scan.

    Returns the values and the maximizing indices (first index on ties).
    """
    x = np.asarray(x, dtype=float)
    fx = np.asarray(fx, dtype=float)
    m = np.asarray(m, dtype=float)
    values = np.empty(len(m))
    index = np.empty(len(m), dtype=np.int64)
    chunk = max(1, (1 << 22) // max(1, len(x)))
    for start in range(0, len(m), chunk):
        mm = m[start : start + chunk]
        v = mm[:, None] * x[None, :] - fx[None, :]
        k = np.argmax(v, axis=1)
        index[start : start + chunk] = k
        values[start : start + chunk] = v[np.arange(len(mm)), k]
    return values, index


def _banded_conjugate(x: list, fx: list, m: list) -> tuple[list, list]:
    """Scan outward from the previous maximizer.

    For exactly convex data ``j -> m x_j - f_j`` is unimodal, and each
    computed value is within ``B = eps (|m| max|x| + max|f|)`` of the exact
    one.  Scanning both ways until values fall ``4 B`` below the running
    best therefore covers every index that could be the computed maximum,
    so the result matches a full scan bit for bit.
    """
    n = len(x)
    eps = np.finfo(float).eps
    xmax = max(abs(x[0]), abs(x[-1]))
    fmax = max(abs(v) for v in fx)
    p = 0
    values, index = [], []
    for mm in m:
        band = 4.0 * eps * (abs(mm) * xmax + fmax)
        best = mm * x[p] - fx[p]
        hi = p
        while hi + 1 < n:
            v = mm * x[hi + 1] - fx[hi + 1]
            if v < best - band:
                break
            hi += 1
            if v > best:
                best = v
        lo = p
        while lo > 0:
            v = mm * x[lo - 1] - fx[lo - 1]
            if v < best - band:
                break
            lo -= 1
            if v > best:
                best = v
        # first maximizer within [lo, hi], as a full scan would pick
        k, kv = lo, mm * x[lo] - fx[lo]
        for j in range(lo + 1, hi + 1):
            v = mm * x[j] - fx[j]
            if v > kv:
                k, kv = j, v
        values.append(kv)
        index.append(k)
        p = k
    return values, index


def conjugate_values(x_grid, f_values, m_grid, mode: str = "sup", fast: bool = True):
    """Discrete transform of sampled values.

    ``mode="sup"`` gives ``max_j (m x_j - f_j)``; ``mode="inf"`` gives
    ``min_j (m x_j - f_j)``, the transform of a concave function.  Ties go to
    the smallest ``x``.  Returns ``(values, argext_x, path)`` where ``path``
    is ``"fast"`` or ``"scan"``.
    """
    x = np.asarray(x_grid, dtype=float)
    fx = np.asarray(f_values, dtype=float)
    m = np.asarray(m_grid, dtype=float)
    if x.ndim != 1 or x.shape != fx.shape:
        raise InvalidParameter("x grid and values must be 1-d arrays of equal length")
    if len(x) == 0:
        raise EmptyFeasibleSet("empty x grid")
    if mode not in ("sup", "inf"):
        raise InvalidParameter(f"mode must be 'sup' or 'inf', not {mode!r}")
    sign = 1.0 if mode == "sup" else -1.0
    # inf_x (m x - f) = -sup_x ((-m) x - (-f)); negation is exact
    fs, ms = sign * fx, sign * m
    usable = (
        fast
        and len(x) > 2
        and bool(np.all(np.isfinite(fs)))
        and bool(np.all(np.isfinite(ms)))
        and bool(np.all(np.diff(x) > 0))
        and _exactly_convex(x, fs)
    )
    if usable:
        vals, idx = _banded_conjugate(x.tolist(), fs.tolist(), ms.tolist())
        vals, idx = np.array(vals), np.array(idx, dtype=np.int64)
        path = "fast"
    else:
        vals, idx = brute_force_conjugate(x, fs, ms)
        path = "scan"
    return sign * vals, x[idx], path


def discrete_conjugate(
    f: ScalarFunction | Sequence[float],
    x_grid,
    m_grid,
    mode: str = "sup",
    fast: bool = True,
) -> list[tuple[float, float]]:
    """``(m, g(m))`` with ``g(m) = sup_x (m x - f(x))`` over the x grid.

    ``f`` is a function or its values on the grid.  Convex samples use a
    linear-time scan that tracks the monotone maximizer; anything else falls
    back to a full scan, which yields the transform of the grid's convex
    envelope.  ``mode="inf"`` takes the infimum instead.
    """
    x = np.asarray(x_grid, dtype=float)
    fx = f(x) if isinstance(f, ScalarFunction) else np.asarray(f, dtype=float)
    vals, _, _ = conjugate_values(x, fx, m_grid, mode, fast)
    return [(float(a), float(b)) for a, b in zip(np.asarray(m_grid, dtype=float), vals)]


# ---------------------------------------------------------------------------
# support lines, infimal convolution, Clairaut


def _line(slope: float, offset: float):
    """``m -> slope m - offset``"""
    return CombineBody("-", CombineBody("*", ConstBody(slope), IdentityBody()), ConstBody(offset))


def _end_slope(f: ScalarFunction, end: float, anchor: float) -> float:
    fp = f.derivative()
    try:
        return float(fp(end))
    except LegendreError:
        pass
    v = one_sided_limit(lambda t: float(fp(t)), end, anchor)
    if v is None:
        raise DomainError(f"slope of {f.label or f.describe()} unavailable at {end!r}")
    return v


def _end_value(f: ScalarFunction, end: float, anchor: float) -> float:
    try:
        return float(f(end))
    except LegendreError:
        pass
    v = one_sided_limit(lambda t: float(f(t)), end, anchor)
    if v is None or not math.isfinite(v):
        raise DomainError(f"value of {f.label or f.describe()} unavailable at {end!r}")
    return v


def extend_with_support_lines(g_core: ScalarFunction, f: ScalarFunction) -> ScalarFunction:
    """Continue ``g_core`` beyond the end slopes of ``f`` by endpoint lines.

    At a finite endpoint ``x_e`` with one-sided slope ``s_e``, the lines of
    support through ``(x_e, f(x_e))`` give ``g(m) = m x_e - f(x_e)`` for all
    ``m`` beyond ``s_e`` (below it at the end where ``f'`` is smallest,
    above it at the end where ``f'`` is largest).  Works for ``f'``
    increasing or decreasing.
    """
    dom = f.domain
    if not (math.isfinite(dom.lo) or math.isfinite(dom.hi)):
        raise DomainError("f has no finite endpoint to extend from")
    mid_lo, mid_hi = dom.lo, dom.hi
    if not math.isfinite(mid_lo):
        mid_lo = mid_hi - 1.0
    if not math.isfinite(mid_hi):
        mid_hi = mid_lo + 1.0
    anchor = 0.5 * (mid_lo + mid_hi)
    ends = []
    for end in (dom.lo, dom.hi):
        if math.isfinite(end):
            ends.append((end, _end_slope(f, end, anchor), _end_value(f, end, anchor)))
    sa = _end_slope(f, mid_lo if math.isfinite(dom.lo) else anchor, anchor)
    sb = _end_slope(f, mid_hi if math.isfinite(dom.hi) else anchor, anchor)
    increasing = sb >= sa
    low_piece = high_piece = None
    for end, s, v in ends:
        if not math.isfinite(s):
            continue
        at_low_end = end == dom.lo
        if at_low_end == increasing:
            low_piece = (Interval(-INF, s, False, True), _line(end, v))
        else:
            high_piece = (Interval(s, INF, True, False), _line(end, v))
    pieces = []
    if low_piece:
        pieces.append(low_piece)
    core_lo = low_piece[0].hi if low_piece else g_core.domain.lo
    core_hi = high_piece[0].lo if high_piece else g_core.domain.hi
    pieces.append((Interval(core_lo, core_hi, math.isfinite(core_lo), math.isfinite(core_hi)), g_core.body))
    if high_piece:
        pieces.append(high_piece)
    lo = pieces[0][0].lo
    hi = pieces[-1][0].hi
    return ScalarFunction(
        PiecewiseBody(tuple(pieces)),
        Interval(lo, hi, math.isfinite(lo), math.isfinite(hi)),
        f"{g_core.label or 'g'} with support lines",
    )


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(h, a: float, b: float, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for a minimum of unimodal ``h`` on ``[a, b]``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    hc, hd = h(c), h(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if hc <= hd:
            b, d, hd = d, c, hc
            c = b - _GOLDEN * (b - a)
            hc = h(c)
        else:
            a, c, hc = c, d, hd
            d = a + _GOLDEN * (b - a)
            hd = h(d)
    return (c, hc) if hc <= hd else (d, hd)


def infimal_convolution(
    f1: ScalarFunction,
    f2: ScalarFunction,
    x: float,
    t_grid,
    return_split: bool = False,
):
    """``inf_t f1(x - t) + f2(t)`` over the grid, then polished locally.

    The grid minimizer is refined by golden-section search between its
    feasible neighbours.  Raises EmptyFeasibleSet when no grid point keeps
    both arguments inside their domains.
    """
    x = float(x)

    def h(t):
        if not (f2.domain.contains(t) and f1.domain.contains(x - t)):
            return INF
        try:
            v = float(f1(x - t)) + float(f2(t))
        except LegendreError:
            return INF
        return v if math.isfinite(v) else INF

    ts = np.sort(np.asarray(list(t_grid), dtype=float))
    hs = np.array([h(float(t)) for t in ts])
    if not np.any(np.isfinite(hs)):
        raise EmptyFeasibleSet(f"no grid split is feasible at x={x!r}")
    k = int(np.argmin(hs))
    best_t, best = float(ts[k]), float(hs[k])
    a = float(ts[k - 1]) if k > 0 and np.isfinite(hs[k - 1]) else best_t
    b = float(ts[k + 1]) if k + 1 < len(ts) and np.isfinite(hs[k + 1]) else best_t
    if b > a:
        t, v = _golden_min(h, a, b)
        if v < best:
            best_t, best = t, v
    return (best, best_t) if return_split else best


def clairaut_singular_solution(h: ScalarFunction, m_grid) -> DualCurveSample:
    """Singular solution of ``y = x y' + h(y')``.

    With ``g = -h`` the envelope is ``(x, y) = (g'(m), m g'(m) - g(m))``.
    Points are stored as ``(x, m, d)`` with ``d = g(m)`` so that
    ``y = m x - d``; ``metadata["envelope"]`` holds the ``(x, y)`` pairs and
    the general solutions are the lines ``y = c x + h(c)``.
    """
    ms = np.asarray(list(m_grid), dtype=float)
    bad = [float(m) for m in ms if not h.domain.contains(float(m))]
    if bad:
        raise DomainError(f"m={bad[0]!r} outside {h.domain}")
    s = h.series(ms, 1)
    g, gp = -s[0], -s[1]
    y = ms * gp - g
    points = tuple((float(a), float(b), float(c)) for a, b, c in zip(gp, ms, g))
    meta = {
        "envelope": tuple((float(a), float(b)) for a, b in zip(gp, y)),
        "general_solution": f"y = c*x + h(c), h = {h.label or h.describe()}",
        "degenerate": len(ms) > 1 and bool(np.all(gp == gp[0])),
    }
    return DualCurveSample(points, h.label, (), meta)
