import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vofrac.errors import DomainError, ParseError
from vofrac.expr import parse_expression


@pytest.mark.parametrize(
    "src, t, expected",
    [
        ("1-0.05*exp(-t)", 1.0, 1 - 0.05 * math.exp(-1.0)),
        ("t^2", 3.0, 9.0),
        ("2^3^2", 0.0, 512.0),
        ("-t^2", 2.0, -4.0),
        ("(1+t)*(1-t)", 0.5, 0.75),
        ("sin(t)+cos(t)", 0.3, math.sin(0.3) + math.cos(0.3)),
        ("ln(t)/t", 2.0, math.log(2.0) / 2.0),
        ("abs(t-3)", 1.0, 2.0),
        ("1.5e-2*t", 2.0, 0.03),
        ("8/2/2", 0.0, 2.0),
        ("0.5", 9.0, 0.5),
    ],
)
def test_evaluate(src, t, expected):
    assert parse_expression(src)(t) == pytest.approx(expected, rel=1e-15)


def test_parse_error_offset():
    with pytest.raises(ParseError) as info:
        parse_expression("sin(")
    assert info.value.offset == 4


@pytest.mark.parametrize("src", ["", "t +", "foo(t)", "1..2", "(t", "t)", "2 t", "y"])
def test_rejects_malformed(src):
    with pytest.raises(ParseError):
        parse_expression(src)


def test_domain_errors():
    with pytest.raises(DomainError):
        parse_expression("ln(t)")(0.0)
    with pytest.raises(DomainError):
        parse_expression("t^0.5")(-1.0)
    assert parse_expression("t^3")(-2.0) == -8.0


def test_variables_and_constant():
    assert parse_expression("x*2").variables() == {"x"}
    assert parse_expression("exp(1)").is_constant()
    assert not parse_expression("t").is_constant()


def test_vectorized_evaluation():
    import numpy as np

    e = parse_expression("t^2+1")
    np.testing.assert_allclose(e(np.array([0.0, 1.0, 2.0])), [1.0, 2.0, 5.0])


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_arithmetic_agrees_with_python(a, b):
    src = f"({a!r})*t+({b!r})"
    assert parse_expression(src)(1.5) == pytest.approx(a * 1.5 + b, rel=1e-15, abs=1e-12)
