import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncquant.expr import (
    Add,
    Chart,
    DomainError,
    ExprSyntaxError,
    NotPolynomialError,
    UnknownIdentifierError,
    differentiate,
    evaluate,
    numerically_equal,
    parse,
    polynomial_coefficients,
    to_string,
)

XYZ = Chart.of("x1", "x2", "x3")
AA = Chart.of(("r", "action"), ("x1", "action"), ("gamma", "noncompact"), ("alpha", "periodic", 2 * math.pi))


def test_parse_sum_of_squares():
    e = parse("x1^2 + x2^2 + x3^2", XYZ)
    assert isinstance(e, Add)
    assert evaluate(e, {"x1": 1.0, "x2": 2.0, "x3": 3.0}) == 14.0


def test_parse_chart_map_component():
    e = parse("sqrt(r^2 - x1^2) * sin(gamma)", AA)
    assert evaluate(e, {"r": 1.0, "x1": 0.0, "gamma": math.pi / 2}) == 1.0


def test_syntax_error_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x1 + ", XYZ)
    assert info.value.position == 5


@pytest.mark.parametrize("src", ["x1 +* x2", "(x1", "x1)", "sin x1", "x1 ^ 1.5", ""])
def test_malformed(src):
    with pytest.raises(ExprSyntaxError):
        parse(src, XYZ)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse("x4 + 1", XYZ)


def test_unary_minus_binds_looser_than_power():
    assert evaluate(parse("-x1^2"), {"x1": 3.0}) == -9.0
    assert evaluate(parse("(-x1)^2"), {"x1": 3.0}) == 9.0
    assert evaluate(parse("x1^-2"), {"x1": 2.0}) == 0.25


def test_table_derivatives():
    g = parse("sin(gamma)", AA)
    assert to_string(differentiate(g, "gamma")) == "cos(gamma)"
    s = parse("x1^2 + x2^2 + x3^2", XYZ)
    d = differentiate(s, "x1")
    pts = [{"x1": v, "x2": 0.3, "x3": -1.0} for v in (-2.0, 0.5, 7.0)]
    assert numerically_equal(d, parse("2*x1"), pts, 0.0)


def test_derivative_against_central_difference():
    e = parse("sqrt(r^2 - x1^2) * sin(gamma)", AA)
    d = differentiate(e, "x1")
    expected = parse("-x1 * (r^2 - x1^2)^-1 * sqrt(r^2 - x1^2) * sin(gamma)")
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(20):
        r = rng.uniform(0.5, 3.0)
        p = {"r": r, "x1": rng.uniform(-0.8, 0.8) * r, "gamma": rng.uniform(-3, 3), "alpha": 0.0}
        hi, lo = dict(p, x1=p["x1"] + h), dict(p, x1=p["x1"] - h)
        fd = (evaluate(e, hi) - evaluate(e, lo)) / (2 * h)
        exact = evaluate(d, p)
        assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact))
        assert abs(exact - evaluate(expected, p)) <= 1e-12 * max(1.0, abs(exact))


def test_evaluate_examples():
    assert evaluate(parse("sqrt(x1^2+x2^2+x3^2)"), {"x1": 3.0, "x2": 0.0, "x3": 4.0}) == 5.0
    with pytest.raises(DomainError) as info:
        evaluate(parse("1/(x1-1)"), {"x1": 1.0})
    assert "x1 - 1" in to_string(info.value.subexpr)
    with pytest.raises(DomainError):
        evaluate(parse("sqrt(x1)"), {"x1": -1.0})


def test_evaluate_is_deterministic_and_broadcasts():
    e = parse("sin(x1)*x2 + exp(x3)/3")
    p = {"x1": 0.7, "x2": -1.3, "x3": 0.2}
    assert evaluate(e, p) == evaluate(e, p)
    xs = np.linspace(-1, 1, 5)
    v = evaluate(e, {"x1": xs, "x2": -1.3, "x3": 0.2})
    assert v.shape == (5,)
    assert v[3] == evaluate(e, {"x1": float(xs[3]), "x2": -1.3, "x3": 0.2})


def test_constants_and_folding():
    e = parse("0.5*I*r^2", {"r"}, {"I": 2.0})
    assert evaluate(e, {"r": 3.0}) == 9.0
    # the parser keeps the tree as written; smart constructors fold
    x1, x2 = parse("x1"), parse("x2")
    assert to_string(x1 - x1) == "0"
    assert to_string(0 * x1 + 1 * x2) == "x2"
    assert to_string(parse("2") * parse("3") + x1 * 1) == "6 + x1"


def test_polynomial_coefficients():
    poly = polynomial_coefficients(parse("3*r^2 - 2*r*x1 + 5"), ["r", "x1"])
    assert poly == {(2, 0): 3.0, (1, 1): -2.0, (0, 0): 5.0}
    with pytest.raises(NotPolynomialError):
        polynomial_coefficients(parse("sin(r)"), ["r"])
    with pytest.raises(NotPolynomialError):
        polynomial_coefficients(parse("r + gamma"), ["r"])


# ------------------------------------------------------ random expression trees

NAMES = ("x1", "x2", "x3")
leaves = st.one_of(
    st.sampled_from(NAMES),
    st.integers(-5, 5).map(str),
    st.floats(0.1, 4.0).map(lambda v: repr(round(v, 3))),
)


def _combine(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
        lambda t: f"({t[0]}) {t[1]} ({t[2]})"
    )
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "-"]), children).map(
        lambda t: f"{t[0]}({t[1]})"
    )
    power = st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}")
    return st.one_of(binary, unary, power)


trees = st.recursive(leaves, _combine, max_leaves=8)


def _points(seed, n):
    rng = np.random.default_rng(seed)
    return [{x: float(rng.uniform(-1.5, 1.5)) for x in NAMES} for _ in range(n)]


@settings(max_examples=60, deadline=None)
@given(trees)
def test_print_parse_roundtrip(src):
    e = parse(src)
    back = parse(to_string(e))
    assert to_string(back) == to_string(e)
    for p in _points(1, 100):
        a, b = evaluate(e, p), evaluate(back, p)
        assert a == b or abs(a - b) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=40, deadline=None)
@given(trees, trees, st.sampled_from(NAMES))
def test_derivative_linearity_and_leibniz(fs, gs, x):
    f, g = parse(fs), parse(gs)
    pts = _points(2, 10)
    assert numerically_equal(differentiate(f + g, x), differentiate(f, x) + differentiate(g, x), pts, 1e-9)
    assert numerically_equal(
        differentiate(f * g, x), differentiate(f, x) * g + f * differentiate(g, x), pts, 1e-9
    )


@settings(max_examples=40, deadline=None)
@given(trees, st.sampled_from(NAMES))
def test_derivative_matches_finite_difference(src, x):
    e = parse(src)
    d = differentiate(e, x)
    h = 1e-5
    for p in _points(3, 5):
        fd = (evaluate(e, dict(p, **{x: p[x] + h})) - evaluate(e, dict(p, **{x: p[x] - h}))) / (2 * h)
        scale = max(1.0, abs(evaluate(e, p)))
        assert abs(evaluate(d, p) - fd) <= 1e-5 * scale
