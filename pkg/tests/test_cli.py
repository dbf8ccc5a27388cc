import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from legendre.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, emit_rows, fmt_num, main, parse_domain
from legendre.funcspace import Interval


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_csv(*argv):
    code, text = run(*argv, "--format", "csv")
    rows = list(csv.reader(io.StringIO(text)))
    return code, rows[0], [[float(v) for v in r] for r in rows[1:]]


class TestTransform:
    def test_exp_by_sup(self):
        code, head, rows = run_csv("transform", "exp(x)", "--domain=-10:10", "--method=sup", "--at", "1.0")
        assert code == EXIT_OK and head == ["m", "g"]
        assert rows[0][1] == pytest.approx(-1.0, abs=1e-5)

    def test_exp_auto_is_explicit(self):
        code, text = run("transform", "exp(x)", "--at", "1,2", "--format", "json")
        data = json.loads(text)
        assert data[0]["g"] == pytest.approx(-1.0, abs=1e-12)
        assert data[1]["g"] == pytest.approx(2 * math.log(2) - 2, abs=1e-12)

    def test_integral_method(self):
        code, head, rows = run_csv("transform", "x^2/2", "--method", "integral", "--domain=-5:5", "--x0", "1", "--at", "0.5")
        assert code == EXIT_OK
        assert rows[0][1] == pytest.approx(0.125, abs=1e-9)

    def test_concave_infimum(self):
        # an expression starting with '-' goes after '--'
        code, text = run("transform", "--method", "sup", "--inf", "--domain=-5:5", "--at", "2", "--format", "json", "--", "-x^2")
        assert json.loads(text)[0]["g"] == pytest.approx(-1.0, abs=1e-5)

    def test_parametric_example(self):
        code, head, rows = run_csv("transform", "sin(x^2)-x^3+exp(x)", "--method=parametric", "--x", "0.5,1,-2")
        assert head == ["x", "m", "d"]
        for x, m, d in rows:
            want_d = 2 * x * x * math.cos(x * x) - math.sin(x * x) - 2 * x**3 + (x - 1) * math.exp(x)
            want_m = 2 * x * math.cos(x * x) - 3 * x * x + math.exp(x)
            assert m == pytest.approx(want_m, rel=1e-14)
            assert d == pytest.approx(want_d, rel=1e-13, abs=1e-14)

    def test_linear_warns(self, capsys):
        code, text = run("transform", "x", "--method=parametric", "--x", "1,2")
        assert code == EXIT_OK
        assert "single slope" in capsys.readouterr().err

    def test_slope_outside_range_is_usage_error(self, capsys):
        code, _ = run("transform", "ln(x)", "--domain", "0:1", "--at", "1")
        assert code == EXIT_USAGE
        assert capsys.readouterr().err.startswith("error:")

    def test_parse_error(self, capsys):
        code, _ = run("transform", "x +", "--at", "1")
        assert code == EXIT_USAGE

    def test_bad_flag_value(self):
        with pytest.raises(SystemExit) as exc:
            run("transform", "x", "--format", "xml")
        assert exc.value.code == EXIT_USAGE

    def test_bad_grid(self, capsys):
        code, _ = run("transform", "exp(x)", "--grid", "0", "--method", "sup", "--at", "1")
        assert code == EXIT_USAGE


class TestVerify:
    def test_pass(self):
        code, text = run("verify", "--id", "c.ex")
        assert code == EXIT_OK
        assert "1 pass, 0 fail" in text

    def test_fail_exit_code(self):
        code, _ = run("verify", "--id", "c.ex", "--tol", "1e-30")
        assert code == EXIT_FAIL

    def test_skipped_stub_is_not_failure(self):
        code, text = run("verify", "--filter", "id=e.elliptic_F", "--format", "json")
        assert code == EXIT_OK
        assert json.loads(text)[0]["status"] == "skipped"

    def test_csv(self):
        code, text = run("verify", "--part", "b", "--id", "b.xp*", "--format", "csv", "--draws", "1", "--seed", "2")
        rows = list(csv.DictReader(io.StringIO(text)))
        assert len(rows) == 2 and {r["status"] for r in rows} == {"pass"}
        assert float(rows[0]["max_abs_residual"]) <= 1e-8

    def test_bad_filter(self):
        code, _ = run("verify", "--filter", "colour=red")
        assert code == EXIT_USAGE


class TestCatalog:
    def test_show(self):
        code, text = run("catalog", "show", "c.ex", "--format", "json")
        rec = json.loads(text)
        assert code == EXIT_OK
        assert (rec["f"], rec["g"]) == ("exp(x)", "m*ln(m) - m")
        assert rec["m_domain"] == str(Interval(0.0, math.inf))

    def test_show_stub(self):
        rec = json.loads(run("catalog", "show", "e.bessel_J0", "--format", "json")[1])
        assert rec["status"] == "unverified: special function out of scope"

    def test_show_with_param(self):
        rec = json.loads(run("catalog", "show", "b.xpp", "--param", "p=4", "--format", "json")[1])
        assert rec["parameters"]["q"] == pytest.approx(4 / 3)

    def test_list_and_properties(self):
        code, head, _ = run_csv_text("catalog", "list", "--part", "d")
        assert head == ["id", "part", "name", "verified"]
        code, text = run("catalog", "properties", "--format", "json")
        assert len(json.loads(text)) == 12

    def test_unknown(self):
        assert run("catalog", "show", "b.nope")[0] == EXIT_USAGE
        assert run("catalog", "show")[0] == EXIT_USAGE


def run_csv_text(*argv):
    code, text = run(*argv, "--format", "csv")
    rows = list(csv.reader(io.StringIO(text)))
    return code, rows[0], rows[1:]


class TestJet:
    def test_x_sin_x(self):
        code, head, rows = run_csv("jet", "x*sin(x)", "--x0", "0", "--order", "4")
        assert code == EXIT_OK
        coeffs = [r[1] for r in rows]
        np.testing.assert_allclose(coeffs, [0, 0, 0.25, 0, 1 / 96], atol=1e-12)

    def test_table_shows_basepoint(self):
        assert run("jet", "exp(x)", "--x0", "0")[1].startswith("m0 = 1.0")

    def test_singular(self, capsys):
        assert run("jet", "x^3", "--x0", "0")[0] == EXIT_USAGE
        assert "f''(0.0)" in capsys.readouterr().err


class TestOtherCommands:
    def test_clairaut(self):
        code, head, rows = run_csv("clairaut", "m^2", "--m-range=-1:1", "--points", "5")
        assert head == ["x", "y", "m"]
        for x, y, m in rows:
            # envelope of y = x m + m^2 is y = -x^2/4
            assert x == pytest.approx(-2 * m) and y == pytest.approx(-x * x / 4)

    def test_clairaut_needs_finite_range(self):
        assert run("clairaut", "m^2", "--m-range=0:inf")[0] == EXIT_USAGE

    def test_plotdata_two_branches(self):
        code, head, rows = run_csv("plotdata", "--entry", "b.sin-figure", "--points", "40")
        assert head == ["branch", "x", "m", "d"]
        assert {r[0] for r in rows} == {0.0, 1.0}
        for b, x, m, d in rows:
            assert (b == 0) == (x < 0)
            assert m == pytest.approx(math.cos(x), rel=1e-14)

    def test_plotdata_needs_source(self):
        assert run("plotdata")[0] == EXIT_USAGE

    @pytest.mark.parametrize("to, want", [("mb", (2.0, -3.0)), ("uv", (-2 / 3, 1 / 3))])
    def test_convert(self, to, want):
        code, head, rows = run_csv("convert", "2", "3", "--to", to)
        assert rows[0] == pytest.approx(list(want), rel=1e-15)


class TestFormatting:
    """Numbers are emitted in shortest round-trip form."""

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_round_trip(self, v):
        assert float(fmt_num(v)) == v

    @given(st.lists(st.floats(-1e300, 1e300), min_size=1, max_size=5))
    def test_csv_and_json_round_trip(self, vals):
        rows = [(i, v) for i, v in enumerate(vals)]
        for fmt in ("csv", "json"):
            buf = io.StringIO()
            emit_rows(["i", "v"], rows, fmt, buf)
            if fmt == "csv":
                back = [float(r[1]) for r in list(csv.reader(io.StringIO(buf.getvalue())))[1:]]
            else:
                back = [d["v"] for d in json.loads(buf.getvalue())]
            assert back == vals

    def test_non_finite_json(self):
        buf = io.StringIO()
        emit_rows(["v"], [(math.inf,)], "json", buf)
        assert json.loads(buf.getvalue()) == [{"v": "inf"}]

    @pytest.mark.parametrize("text, want", [("0:1", Interval(0.0, 1.0)), (":2", Interval(-math.inf, 2.0)), ("-pi:pi", Interval(-math.pi, math.pi)), ("[0, 1]", Interval.closed(0.0, 1.0))])
    def test_domains(self, text, want):
        assert parse_domain(text) == want
