from fractions import Fraction as Q

import pytest

from flatpencil.errors import ParseError
from flatpencil.exprparse import parse_expr, parse_rational
from flatpencil.qpoly import QPoly


def test_rational_literals():
    assert parse_expr("3/4", 1) == QPoly.const(1, Q(3, 4))
    assert parse_expr("7", 1) == QPoly.const(1, 7)
    assert parse_rational("-3/4") == Q(-3, 4)


def test_operators_and_precedence():
    assert parse_expr("1 + 2*t1^2", 1) == QPoly.const(1, 1) + QPoly.var(1, 0) ** 2 * 2
    assert parse_expr("-t1^2", 1) == -(QPoly.var(1, 0) ** 2)
    assert parse_expr("(t1 + 1)*(t1 - 1)", 1) == QPoly.var(1, 0) ** 2 - 1


def test_exp_forms():
    assert parse_expr("exp(t2)", 2) == QPoly.exp(2, 1, 1)
    assert parse_expr("exp(3*t1)", 2) == QPoly.exp(2, 0, 3)
    assert parse_expr("exp(-1/2*t2)", 2) == QPoly.exp(2, 1, Q(-1, 2))


def test_whitespace_insignificant():
    assert parse_expr(" 1 / 2 * t1 ", 1) == parse_expr("1/2*t1", 1)


def test_double_plus_is_error_with_position():
    with pytest.raises(ParseError) as info:
        parse_expr("t1 ++ 2", 1)
    assert info.value.line == 1
    assert info.value.col == 5


def test_multiline_error_position():
    with pytest.raises(ParseError) as info:
        parse_expr("t1 +\n t9", 2)
    assert info.value.line == 2
    assert info.value.col == 2


def test_variable_out_of_range():
    with pytest.raises(ParseError):
        parse_expr("t3", 2)


def test_unknown_function_rejected():
    # No square roots: a flat coordinate like 2*sqrt(t1) is outside the ring.
    with pytest.raises(ParseError):
        parse_expr("2*sqrt(t1)", 1)


def test_fractional_exponent_rejected():
    with pytest.raises(ParseError):
        parse_expr("t1^(1/2)", 1)


def test_negative_exponent_rejected():
    with pytest.raises(ParseError):
        parse_expr("t1^-1", 1)


def test_division_of_polynomials_rejected():
    with pytest.raises(ParseError):
        parse_expr("t1/2", 1)
