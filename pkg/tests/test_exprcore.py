import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from geogalois.exactalg import Poly, RatFun
from geogalois.exprcore import (
    NonIntegerExponent,
    NotRational,
    ParseError,
    UnknownIdentifier,
    compile_expr,
    differentiate,
    eval_interval,
    free_vars,
    has_functions,
    parse,
    substitute,
    to_ratfun,
    to_string,
)
from geogalois.intervals import mpf_to_fraction

CORPUS = [
    "1/(x^2-y^2)",
    "(x^2-y^2)^(-2)",
    "x^2+y^2",
    "cos(2*x)*exp(-2*y^2)",
    "x*y*z",
    "-y^2 + 3/4*x",
    "sin(x)^2 + cos(x)^2",
]


@pytest.mark.parametrize("text", CORPUS)
def test_print_parse_roundtrip(text):
    e = parse(text)
    assert parse(to_string(e)) == e


def test_unary_minus_binds_looser_than_power():
    assert to_ratfun(parse("-y^2"), "y")(3) == -9
    assert to_ratfun(parse("(-y)^2"), "y")(3) == 9


@pytest.mark.parametrize(
    "text, err",
    [("x^y", NonIntegerExponent), ("x^(1/2)", NonIntegerExponent), ("foo(x)", UnknownIdentifier), ("(x+", ParseError)],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse(text)


def test_parse_error_offset():
    with pytest.raises(ParseError) as info:
        parse("x + * y")
    assert info.value.offset == 4


@pytest.mark.parametrize("text", CORPUS)
@pytest.mark.parametrize("var", ["x", "y"])
def test_derivative_matches_central_difference(text, var):
    e = parse(text)
    d = compile_expr(differentiate(e, var))
    f = compile_expr(e)
    p = {"x": 1.7, "y": 0.6, "z": 0.9}
    h = 1e-5
    hi = dict(p, **{var: p[var] + h})
    lo = dict(p, **{var: p[var] - h})
    fd = (f(**hi) - f(**lo)) / (2 * h)
    assert math.isclose(d(**p), fd, rel_tol=1e-7, abs_tol=1e-8)


def test_to_ratfun_and_substitute():
    e = substitute(parse("1/(x^2-y^2)"), {"x": parse("0")})
    y = Poly.gen()
    assert to_ratfun(e, "y") == RatFun(Poly([-1]), y * y)
    with pytest.raises(NotRational):
        to_ratfun(parse("exp(y)"), "y")


def test_free_vars_and_functions():
    assert free_vars(parse("x*y + 2")) == {"x", "y"}
    assert has_functions(parse("cos(2*x)"))
    assert not has_functions(parse("x^3"))


@given(st.integers(-30, 30), st.integers(1, 30), st.integers(-30, 30))
def test_interval_encloses_exact_value(a, b, c):
    e = parse("(x^3 - 2*x*y + y^2)/(1 + x^2)")
    x, yv = Fraction(a, b), Fraction(c, 7)
    exact = (x**3 - 2 * x * yv + yv * yv) / (1 + x * x)
    z = eval_interval(e, {"x": x, "y": yv}, 80)
    lo, hi = (mpf_to_fraction(v) for v in z.real._mpi_)
    assert lo <= exact <= hi


def test_float_and_mp_backends_agree():
    e = parse("x*y*z + sin(x)*exp(-y)")
    f = compile_expr(e)
    g = compile_expr(e, backend="mp")
    assert math.isclose(f(1.0, 2.0, 3.0), float(g(1, 2, 3)), rel_tol=1e-14)
