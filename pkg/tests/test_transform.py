import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legendre import catalog
from legendre.catalog import apply_property
from legendre.errors import DivisionByZero, DomainError, EmptyFeasibleSet, InvalidParameter, QuadratureFailure
from legendre.funcspace import INF, Interval, PiecewiseLinear, make_function
from legendre.transform import (
    TangentLine,
    brute_force_conjugate,
    clairaut_singular_solution,
    conjugate_values,
    convert_dual_coordinates,
    discrete_conjugate,
    extend_with_support_lines,
    infimal_convolution,
    integral_transform,
    method1_explicit,
    parametric_dual,
    piecewise_linear_dual,
)

from .oracles import brute_inf, brute_sup, closed_form_sin_dual


class TestTangentLine:
    def test_of_parabola(self):
        t = TangentLine.of(make_function("x^2/2"), 2.0)
        assert (t.m, t.d) == (2.0, 2.0)
        assert t(2.0) == 2.0

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            TangentLine(math.inf, 0.0)


class TestParametricDual:
    """Sampling (x, m, d) straight from f."""

    def test_sin_x_squared(self):
        f = make_function("sin(x^2)")
        x = math.sqrt(math.pi / 2)
        s = parametric_dual(f, [0.0, x])
        (x0, m0, d0), (x1, m1, d1) = s.points
        assert (m0, d0) == (0.0, 0.0)
        assert m1 == pytest.approx(2 * x * math.cos(x * x), abs=1e-15)
        assert abs(m1) < 1e-15
        assert d1 == pytest.approx(-1.0, abs=1e-15)

    def test_cubic(self):
        s = parametric_dual(make_function("x^3/3", Interval(0.0, INF)), [1.0])
        _, m, d = s.points[0]
        assert m == 1.0 and d == pytest.approx(2 / 3, rel=1e-15)

    def test_skips_points_outside_domain(self):
        f = make_function("ln(x)", Interval(0.0, INF))
        s = parametric_dual(f, [-1.0, 1.0, 0.0, 2.0])
        assert [p[0] for p in s.points] == [1.0, 2.0]
        assert [x for x, _ in s.skipped] == [-1.0, 0.0]
        assert s.metadata["n_skipped"] == 2 and s.metadata["n_requested"] == 4

    def test_skips_points_that_fail(self):
        f = make_function("1/x")  # domain left as the whole line
        s = parametric_dual(f, [-1.0, 0.0, 1.0])
        assert [p[0] for p in s.points] == [-1.0, 1.0]
        assert s.skipped[0][0] == 0.0

    def test_degenerate_line(self):
        s = parametric_dual(make_function("3*x - 1"), np.linspace(-1, 1, 5))
        assert s.metadata["degenerate"]
        assert {(p[1], p[2]) for p in s.points} == {(3.0, 1.0)}

    @settings(max_examples=50)
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=30))
    def test_points_match_definition(self, xs):
        f = make_function("x^4/4 + sin(x)")
        s = parametric_dual(f, xs)
        for (x, m, d), xi in zip(s.points, xs):
            assert x == xi
            assert m == pytest.approx(x**3 + math.cos(x), abs=1e-12)
            assert d == pytest.approx(x * m - (x**4 / 4 + math.sin(x)), abs=1e-12)


class TestMethod1:
    def test_cubic(self):
        f = make_function("x^3/3", Interval(0.0, INF))
        inv = make_function("sqrt(x)", Interval(0.0, INF))
        assert method1_explicit(f, inv, 4.0) == pytest.approx(16 / 3, rel=1e-15)
        assert method1_explicit(f, inv, 4.0) == pytest.approx(2 * 4.0**1.5 / 3, rel=1e-15)

    def test_self_dual_origin(self):
        assert method1_explicit(make_function("x^2/2"), make_function("x"), 0.0) == 0.0

    def test_exp(self):
        inv = make_function("ln(x)", Interval(0.0, INF))
        assert method1_explicit(make_function("exp(x)"), inv, 1.0) == -1.0

    def test_domain_error(self):
        inv = make_function("ln(x)", Interval(0.0, INF))
        with pytest.raises(DomainError):
            method1_explicit(make_function("exp(x)"), inv, -1.0)


def _pl(pts, ls, rs):
    return PiecewiseLinear(tuple(pts), ls, rs)


class TestPiecewiseLinearDual:
    """Exact rational duality for convex polylines."""

    def test_two_lines(self):
        # y = -x + 2 for x <= 1, y = 2x - 1 for x > 1
        p = _pl([(1, 1)], -1, 2)
        q = piecewise_linear_dual(p)
        assert q.float_breakpoints() == [(-1.0, -2.0), (2.0, 1.0)]
        assert q.left_slope == -INF and q.right_slope == INF
        for m in (-1.0, 0.0, 0.5, 2.0):
            assert q(m) == m - 1.0
        assert piecewise_linear_dual(q) == p

    def test_line_maps_to_point(self):
        a, b = Fraction(3, 2), Fraction(-5, 4)
        q = piecewise_linear_dual(_pl([(0, -b)], a, a))
        assert q.breakpoints == ((a, b),)
        assert q.domain == Interval.point(1.5)

    def test_abs(self):
        q = piecewise_linear_dual(_pl([(0, 0)], -1, 1))
        assert q.float_breakpoints() == [(-1.0, 0.0), (1.0, 0.0)]
        assert q.domain == Interval.closed(-1.0, 1.0)

    def test_point_maps_to_line(self):
        q = piecewise_linear_dual(_pl([(2, 5)], -INF, INF))
        assert q(0.0) == -5.0 and q(1.0) == -3.0

    @settings(max_examples=200)
    @given(
        st.lists(st.integers(-40, 40), min_size=1, max_size=6, unique=True),
        st.lists(st.integers(1, 9), min_size=6, max_size=6),
        st.integers(-20, 20),
        st.booleans(),
        st.booleans(),
    )
    def test_involution(self, xs, incs, y0, bounded_left, bounded_right):
        xs = sorted(xs)
        slope = Fraction(-10)
        pts = [(Fraction(xs[0]), Fraction(y0))]
        slopes = []
        for k in range(1, len(xs)):
            slope += incs[k]
            slopes.append(slope)
            x0, y = pts[-1]
            pts.append((Fraction(xs[k]), y + slope * (xs[k] - x0)))
        left = -INF if bounded_left else (slopes[0] - 1 if slopes else Fraction(-1))
        right = INF if bounded_right else (slopes[-1] + 1 if slopes else Fraction(1))
        p = _pl(pts, left, right)
        q = piecewise_linear_dual(p)
        assert piecewise_linear_dual(q) == p
        # conjugate inequality at every vertex pair: f(x) + g(m) >= m x
        for x, y in p.breakpoints:
            for m, d in q.breakpoints:
                assert y + d >= m * x


class TestIntegralTransform:
    def test_sin_example(self):
        inv = make_function("-asin(x)", Interval.closed(-1.0, 1.0))
        got = integral_transform(inv, 0.0, -1.0, 0.5)
        assert got == pytest.approx(-0.5 * math.asin(0.5) - math.sqrt(0.75), abs=1e-10)

    def test_empty_integral(self):
        inv = make_function("-asin(x)", Interval.closed(-1.0, 1.0))
        assert integral_transform(inv, 0.3, 1.25, 0.3) == 1.25

    def test_exp_pair(self):
        inv = make_function("ln(x)", Interval(0.0, INF))
        assert integral_transform(inv, 1.0, -1.0, math.e) == pytest.approx(0.0, abs=1e-10)

    @given(st.floats(0.05, 20.0))
    def test_matches_closed_form(self, m):
        inv = make_function("ln(x)", Interval(0.0, INF))
        assert integral_transform(inv, 1.0, -1.0, m) == pytest.approx(m * math.log(m) - m, abs=1e-9)

    def test_leaving_domain(self):
        inv = make_function("ln(x)", Interval(0.0, INF))
        with pytest.raises(DomainError):
            integral_transform(inv, 1.0, -1.0, -1.0)

    def test_quadrature_failure(self):
        inv = make_function("sin(1/x)/x^2", Interval(0.0, INF))
        with pytest.raises(QuadratureFailure):
            integral_transform(inv, 1.0, 0.0, 1e-4, tol=1e-14)


class TestConvertCoordinates:
    def test_examples(self):
        assert convert_dual_coordinates((2.0, 1.0), "uv") == (-2.0, 1.0)
        assert convert_dual_coordinates((3.0, 4.0), "mb") == (3.0, -4.0)
        with pytest.raises(DivisionByZero):
            convert_dual_coordinates((1.0, 0.0), "uv")
        with pytest.raises(InvalidParameter):
            convert_dual_coordinates((1.0, 1.0), "xy")

    @given(st.floats(-1e3, 1e3), st.floats(0.01, 1e3), st.floats(-5, 5))
    def test_uv_line_is_the_same_line(self, m, d, x):
        u, v = convert_dual_coordinates((m, d), "uv")
        y = m * x - d
        assert u * x + v * y + 1.0 == pytest.approx(0.0, abs=1e-9 * (1 + abs(u * x) + abs(v * y)))


class TestDiscreteConjugate:
    """Sup over a grid, fast banded scan versus full scan."""

    def test_half_square(self):
        x = np.linspace(-5, 5, 2001)
        (m, g), = discrete_conjugate(make_function("x^2/2"), x, [0.5])
        assert g == pytest.approx(0.125, abs=1e-12)
        assert g == brute_sup(x**2 / 2, x, np.array([0.5]))[0]

    def test_abs(self):
        x = np.linspace(-3, 3, 601)
        assert discrete_conjugate(make_function("abs(x)"), x, [0.0]) == [(0.0, 0.0)]

    def test_exp(self):
        x = np.linspace(-10, 10, 4096)
        (_, g), = discrete_conjugate(make_function("exp(x)"), x, [1.0])
        assert g == pytest.approx(-1.0, abs=1e-4)

    def test_inf_mode(self):
        x = np.linspace(0, math.pi / 2, 1001)
        fx = np.sin(x)
        m = np.linspace(0, 1, 11)
        vals, _, path = conjugate_values(x, fx, m, "inf")
        assert path == "fast"
        np.testing.assert_array_equal(vals, brute_inf(fx, x, m))
        np.testing.assert_allclose(vals, [closed_form_sin_dual(t) for t in m], atol=1e-6)

    def test_nonconvex_gives_envelope(self):
        x = np.linspace(-2, 2, 801)
        fx = (x * x - 1) ** 2
        m = np.linspace(-3, 3, 13)
        vals, _, path = conjugate_values(x, fx, m)
        assert path == "scan"
        np.testing.assert_array_equal(vals, brute_sup(fx, x, m))
        assert vals[6] == 0.0  # envelope is flat at height 0 between the wells

    def test_ties_pick_smallest_x(self):
        x = np.array([-1.0, 0.0, 1.0])
        _, arg, _ = conjugate_values(x, np.abs(x), [1.0, -1.0])
        assert arg.tolist() == [0.0, -1.0]

    def test_errors(self):
        with pytest.raises(InvalidParameter):
            conjugate_values([0.0, 1.0], [0.0], [0.0])
        with pytest.raises(InvalidParameter):
            conjugate_values([0.0], [0.0], [0.0], mode="max")
        with pytest.raises(EmptyFeasibleSet):
            conjugate_values([], [], [0.0])

    @settings(max_examples=150, deadline=None)
    @given(
        st.integers(3, 400),
        st.sampled_from(["x^2/2", "exp(x)", "abs(x)", "x^4", "cosh(x) + x", "sqrt(1 + x^2)", "ln(1 + exp(3*x))"]),
        st.floats(0.1, 50.0),
        st.integers(1, 300),
        st.floats(-1e3, 1e3),
    )
    def test_fast_equals_full_scan_bitwise(self, n, text, half, nm, shift):
        x = np.linspace(-half, half, n) + shift * 1e-3
        fx = make_function(text)(x)
        m_lo, m_hi = np.sort(np.random.default_rng(n).uniform(-40, 40, 2))
        m = np.linspace(m_lo, m_hi, nm)
        fast, arg_fast, path = conjugate_values(x, fx, m)
        full, idx = brute_force_conjugate(x, fx, m)
        if path == "fast":
            np.testing.assert_array_equal(fast, full)
            np.testing.assert_array_equal(arg_fast, x[idx])
        slow, _, p2 = conjugate_values(x, fx, m, fast=False)
        assert p2 == "scan"
        np.testing.assert_array_equal(slow, full)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(1, 1000), min_size=3, max_size=60), st.lists(st.floats(-100, 100), min_size=1, max_size=40))
    def test_fast_equals_full_scan_on_exact_convex_integers(self, gaps, ms):
        # convex integer data: increasing second differences
        x = np.cumsum(np.array(gaps, dtype=float))
        d = np.cumsum(np.arange(len(x), dtype=float)) - 30.0
        fx = np.concatenate([[0.0], np.cumsum(d[:-1] * np.diff(x))])
        m = np.sort(np.array(ms))
        vals, arg, path = conjugate_values(x, fx, m)
        assert path == "fast"
        full, idx = brute_force_conjugate(x, fx, m)
        np.testing.assert_array_equal(vals, full)
        np.testing.assert_array_equal(arg, x[idx])


class TestSupportLines:
    """Extending a core transform by endpoint supporting lines."""

    def _sin_extension(self):
        f = make_function("sin(x)", Interval.closed(0.0, math.pi / 2))
        core = make_function("m*acos(m) - sqrt(1 - m^2)", Interval.closed(0.0, 1.0), variable="m")
        return extend_with_support_lines(core, f)

    @pytest.mark.parametrize("m", [-5.0, -1.0, -0.1, -1e-9])
    def test_low_branch(self, m):
        assert self._sin_extension()(m) == pytest.approx(math.pi / 2 * m - 1.0, abs=1e-12)

    @pytest.mark.parametrize("m", [1.0, 1.5, 40.0])
    def test_high_branch(self, m):
        assert self._sin_extension()(m) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("m", [1 / math.sqrt(2), 0.25, 0.9])
    def test_core(self, m):
        assert self._sin_extension()(m) == pytest.approx(closed_form_sin_dual(m), abs=1e-14)

    def test_continuous_and_covers_line(self):
        g = self._sin_extension()
        assert g.domain == Interval()
        for m in (0.0, 1.0):
            assert g(m - 1e-9) == pytest.approx(g(m + 1e-9), abs=1e-8)

    def test_agrees_with_discrete_inf(self):
        g = self._sin_extension()
        x = np.linspace(0.0, math.pi / 2, 20001)
        m = np.linspace(-2.0, 2.0, 41)
        vals, _, _ = conjugate_values(x, np.sin(x), m, "inf")
        np.testing.assert_allclose(g(m), vals, atol=1e-8)

    def test_convex_with_bounded_slopes(self):
        # x^2/2 on [0, 1] has conjugate 0 for m<=0, m^2/2 between, m - 1/2 for m>=1
        f = make_function("x^2/2", Interval.closed(0.0, 1.0))
        core = make_function("m^2/2", Interval.closed(0.0, 1.0), variable="m")
        g = extend_with_support_lines(core, f)
        assert g(-3.0) == 0.0
        assert g(0.5) == 0.125
        assert g(4.0) == pytest.approx(3.5)

    def test_unbounded_domain_rejected(self):
        with pytest.raises(DomainError):
            extend_with_support_lines(make_function("m*ln(m) - m", variable="m"), make_function("exp(x)"))


class TestInfimalConvolution:
    def test_two_half_squares(self):
        f = make_function("x^2/2")
        v, t = infimal_convolution(f, f, 2.0, np.linspace(-5, 5, 101), return_split=True)
        assert v == pytest.approx(1.0, abs=1e-12)
        assert t == pytest.approx(1.0, abs=1e-6)

    def test_polish_beats_grid(self):
        f = make_function("x^2/2")
        v = infimal_convolution(f, f, 2.0 + 1e-3, np.linspace(-5, 5, 11))
        assert v == pytest.approx((2.0 + 1e-3) ** 2 / 4, abs=1e-12)

    def test_steep_second_argument(self):
        f1 = make_function("exp(x)")
        f2 = make_function("1e8*x^2")
        assert infimal_convolution(f1, f2, 0.7, np.linspace(-1, 1, 2001)) == pytest.approx(math.exp(0.7), rel=1e-7)

    def test_conjugate_of_epi_sum(self):
        f = make_function("x^2/2")
        xs = np.linspace(-3, 3, 121)
        h = np.array([infimal_convolution(f, f, float(x), np.linspace(-6, 6, 49)) for x in xs])
        m = np.linspace(-1, 1, 9)
        vals, _, _ = conjugate_values(xs, h, m)
        np.testing.assert_allclose(vals, m * m, atol=1e-4)

    def test_empty(self):
        f1 = make_function("ln(x)", Interval(0.0, INF))
        with pytest.raises(EmptyFeasibleSet):
            infimal_convolution(f1, f1, -5.0, np.linspace(0.1, 1.0, 10))


class TestClairaut:
    """Envelope of the family y = c x + h(c)."""

    def test_quadratic(self):
        h = make_function("-m^2/4", variable="m")
        s = clairaut_singular_solution(h, np.linspace(-2, 2, 9))
        for x, y in s.metadata["envelope"]:
            assert y == pytest.approx(x * x, abs=1e-15)
        assert not s.metadata["degenerate"]

    def test_exp(self):
        h = make_function("-(m*ln(m) - m)", Interval(0.0, INF), variable="m")
        s = clairaut_singular_solution(h, np.linspace(0.1, 5, 25))
        for x, y in s.metadata["envelope"]:
            assert y == pytest.approx(math.exp(x), rel=1e-14)

    def test_envelope_touches_family(self):
        h = make_function("-m^2/4", variable="m")
        s = clairaut_singular_solution(h, [1.5])
        x, m, d = s.points[0]
        y = s.metadata["envelope"][0][1]
        assert y == pytest.approx(m * x + float(h(m)))

    def test_linear_is_degenerate(self):
        h = make_function("2*m + 1", variable="m")
        s = clairaut_singular_solution(h, np.linspace(-1, 1, 5))
        assert s.metadata["degenerate"]
        assert len({p[0] for p in s.points}) == 1

    def test_domain(self):
        h = make_function("-(m*ln(m) - m)", Interval(0.0, INF), variable="m")
        with pytest.raises(DomainError):
            clairaut_singular_solution(h, [-1.0, 1.0])


class TestTransformInvariants:
    """Identities between f and g checked through independent routes."""

    SCALE_BASES = [("c.ex", {}), ("b.xpp", {"p": 3.0}), ("c.cosh", {}), ("c.softplus", {}), ("b.quadratic", {})]

    @pytest.mark.parametrize("entry_id, params", SCALE_BASES)
    @pytest.mark.parametrize("a", [0.5, 3.0])
    def test_scaleout_by_grid_sup(self, entry_id, params, a):
        base = catalog.lookup(entry_id, params)
        scaled = apply_property(base, "scaleout", {"a": a})
        lo, hi = (max(v, -8.0) if i == 0 else min(v, 8.0) for i, v in enumerate((base.x_domain.lo, base.x_domain.hi)))
        x = np.linspace(lo, hi, 200_001)[1:-1]
        fx = a * base.f(x)
        # slopes of a f attained well inside the grid
        inner = x[(x > lo + 0.2 * (hi - lo)) & (x < hi - 0.2 * (hi - lo))]
        m = np.sort(a * base.f.deriv(inner[:: len(inner) // 15], 1))
        grid_vals, _, _ = conjugate_values(x, fx, m)
        np.testing.assert_allclose(grid_vals, a * base.g(m / a), atol=1e-6, rtol=1e-9)
        np.testing.assert_allclose(scaled.g(m), a * base.g(m / a), rtol=1e-13, atol=1e-13)

    @pytest.mark.parametrize("entry_id", ["c.cosh", "b.sqrt1mx2", "c.lncosh", "b.x3x2.b", "c.sinh2", "d.sin2"])
    def test_critical_point_correspondence(self, entry_id):
        pair = catalog.lookup(entry_id)
        assert pair.m_domain.interior_contains(0.0)
        gs = pair.g.series(np.array([0.0]), 1)[:, 0]
        x_star, y_star = gs[1], -gs[0]
        assert pair.f.deriv(x_star, 1) == pytest.approx(0.0, abs=1e-10)
        assert pair.f(x_star) == pytest.approx(y_star, abs=1e-12)
