"""Expression parsing into exact series."""

import pytest

from fedosov_lab.expr import (
    DivisionError,
    ExponentError,
    ExprSyntaxError,
    UnknownVariableError,
    parse_expr,
)
from fedosov_lab.scalar import Scalar
from fedosov_lab.series import GradedSeries


def s(src, dim=2):
    return parse_expr(src, dim).to_series(dim)


def test_rational_power():
    assert s("x1^2/2") == GradedSeries.monomial(2, alpha=(2, 0), coeff=Scalar(1) / 2)


def test_parentheses_and_juxtaposition():
    assert s("(1+x1*x2)") == s("1 + x1 x2")
    assert s("2 x1 x2") == s("2*x1*x2")
    assert s("3(x1 + x2)") == s("3 x1 + 3 x2")


def test_symbols():
    assert s("ħ") == s("hbar")
    assert s("i*i") == s("-1")
    assert s("dx2 dx1") == s("-dx1*dx2")
    assert s("y1^2") == GradedSeries.monomial(2, beta=(2, 0))


def test_powers():
    assert s("(x1 + 1)^2") == s("x1^2 + 2 x1 + 1")
    assert s("x2^(3)") == s("x2*x2*x2")
    assert s("x1^0") == s("1")


def test_unary_minus():
    assert s("-x1 - -x2") == s("x2 - x1")
    assert s("-(x1)^2") == s("-x1^2")


def test_unknown_variable_in_dimension():
    with pytest.raises(UnknownVariableError) as exc:
        parse_expr("x1 + x3", 2)
    assert exc.value.pos == 5
    with pytest.raises(UnknownVariableError):
        parse_expr("z", None)
    assert parse_expr("x3", 4).variables() == {"x3"}


def test_exponent_errors():
    with pytest.raises(ExponentError):
        parse_expr("x1^-1", 2)
    with pytest.raises(ExponentError):
        parse_expr("x1^x2", 2)
    with pytest.raises(ExprSyntaxError):
        parse_expr("x1^(1/2)", 2)


def test_syntax_errors():
    for bad, pos in [("x1 +", 4), ("(x1", 3), ("x1 $ 2", 3), ("0.5 x1", 0), ("x1 )", 3)]:
        with pytest.raises(ExprSyntaxError) as exc:
            parse_expr(bad, 2)
        assert exc.value.pos == pos, bad


def test_division():
    assert s("x1/(2*3)") == s("(1/6) x1")
    assert s("(x1 + i)/i") == s("1 - i x1")
    with pytest.raises(DivisionError):
        s("1/x1")
    with pytest.raises(DivisionError):
        s("x1/(1 - 1)")
