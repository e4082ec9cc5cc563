from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from precanonical.formtext import FormSyntaxError, format_form, parse_form, parse_poly
from precanonical.gradedforms import HorizontalForm, PhaseContext
from precanonical.poly import Poly

NAMES = ["y[0]", "y[1]", "p[0,0]", "p[1,0]", "x[0]"]


@st.composite
def polys(draw, max_terms=4):
    out = Poly()
    for _ in range(draw(st.integers(0, max_terms))):
        c = Fraction(draw(st.integers(-6, 6)), draw(st.integers(1, 4)))
        term = Poly.const(c)
        for _ in range(draw(st.integers(0, 3))):
            term = term * Poly.var(draw(st.sampled_from(NAMES)))
        out = out + term
    return out


def to_sympy(p: Poly):
    syms = {v: sympy.Symbol(v.replace("[", "_").replace("]", "").replace(",", "_")) for v in p.variables()}
    expr = sympy.Integer(0)
    for mono, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, e in mono:
            term *= syms[v] ** e
        expr += term
    return expr, syms


@given(polys(), polys())
def test_product_matches_sympy(a, b):
    ea, _ = to_sympy(a)
    eb, _ = to_sympy(b)
    eab, _ = to_sympy(a * b)
    assert sympy.expand(ea * eb - eab) == 0


@given(polys())
def test_derivative_matches_sympy(a):
    e, syms = to_sympy(a)
    for v in NAMES:
        d, _ = to_sympy(a.diff(v))
        sym = syms.get(v, sympy.Symbol("unused"))
        assert sympy.expand(sympy.diff(e, sym) - d) == 0


@given(polys())
def test_text_round_trip(a):
    assert parse_poly(str(a)) == a


def test_parse_examples():
    assert parse_poly("2*y[0]^2 - p[1,0]/3") == Poly.var("y[0]", 2) * 2 - Poly.var("p[1,0]") / 3
    assert parse_poly("(y[0] + 1) * (y[0] - 1)") == Poly.var("y[0]", 2) - 1


@pytest.mark.parametrize("bad", ["y[0", "q[1]", "p[0]", "y[0]^-1", "1/0", "y[0] y[1]"])
def test_parse_errors(bad):
    with pytest.raises(FormSyntaxError):
        parse_poly(bad)


def test_form_round_trip_and_orientation():
    ctx = PhaseContext(3, 1)
    F = parse_form("p[0,0]*w[0] - y[0]^2*w[2] + w[1]", ctx)
    assert F.degree == 2
    assert parse_form(format_form(F), ctx) == F
    # dx[1]^dx[0] is -dx[0]^dx[1] = -w[2] in three dimensions
    assert parse_form("dx[1]^dx[0]", ctx) == HorizontalForm.from_omega(ctx, {2: Poly.const(-1)})
    assert parse_form("dx[0]^dx[0]", ctx, 2).is_zero()


def test_mixed_degrees_rejected():
    with pytest.raises(FormSyntaxError):
        parse_form("w + y[0]", PhaseContext(2, 1))


def test_power_of_group_is_rejected():
    with pytest.raises(FormSyntaxError):
        parse_poly("(y[0] + 1)^2")
