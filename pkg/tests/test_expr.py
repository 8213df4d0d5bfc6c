import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hadamard.expr import (
    Binary,
    Call,
    Constant,
    Number,
    ParseError,
    Unary,
    UnknownIdentifierError,
    Variable,
    evaluate,
    evaluate_array,
    parse,
    pretty,
    scalar_function,
)

X = Variable()


def test_parse_sum_of_product():
    assert parse("2*x+1") == Binary("add", Binary("mul", Number(2.0), X), Number(1.0))


def test_parse_call_of_power():
    assert parse("exp(x^2)") == Call("exp", Binary("pow", X, Number(2.0)))


def test_unbalanced_call_reports_offset():
    with pytest.raises(ParseError) as info:
        parse("log(")
    assert info.value.offset == 4
    assert "expression" in str(info.value)


def test_trailing_operator_offset():
    with pytest.raises(ParseError) as info:
        parse("2*x+")
    assert info.value.offset == 4


def test_offset_counts_utf8_bytes():
    # U+00A0 is whitespace but takes two bytes
    with pytest.raises(ParseError) as info:
        parse("x\u00a0+ é")
    assert info.value.offset == 5


def test_non_ascii_digits_rejected():
    for src in ("x²", "١+x"):
        with pytest.raises(ParseError):
            parse(src)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("sin(x)")
    assert info.value.name == "sin"


def test_implicit_multiplication_rejected():
    with pytest.raises(ParseError):
        parse("2x")
    with pytest.raises(ParseError):
        parse("2 x")


def test_constants_and_exponent_literals():
    assert parse("pi") == Constant("pi")
    assert parse("e") == Constant("e")
    assert parse("1.5e3") == Number(1500.0)
    assert parse("2*e") == Binary("mul", Number(2.0), Constant("e"))


def test_power_binds_tighter_than_negation():
    assert parse("-x^2") == Unary("neg", Binary("pow", X, Number(2.0)))
    assert evaluate("-x^2", 3).value == -9.0


def test_power_right_associative():
    assert evaluate("2^3^2", 0).value == 512.0
    assert evaluate("2^-1", 0).value == 0.5


def test_pretty_forms():
    assert pretty(Binary("add", Binary("mul", Number(2.0), X), Number(1.0))) == "((2*x)+1)"
    assert pretty(Call("exp", X)) == "exp(x)"


def test_round_trip_right_assoc():
    e = parse("x^2^3")
    assert parse(pretty(e)) == e


def test_evaluate_examples():
    assert evaluate("2*x+1", 3).value == 7.0
    assert evaluate("exp(x)", 1).value == math.e


@pytest.mark.parametrize(
    "src, x",
    [("log(x)", 0.0), ("log(x)", -1.0), ("1/x", 0.0), ("sqrt(x)", -1.0), ("x^0.5", -4.0), ("exp(x)", 1000.0)],
)
def test_domain_faults(src, x):
    out = evaluate(src, x)
    assert not out.ok
    assert out.fault
    assert math.isnan(evaluate_array(src, np.array([x]))[0])


def test_negative_base_integer_power_is_fine():
    assert evaluate("x^3", -2).value == -8.0


def test_scalar_and_vector_paths_agree():
    src = "exp(0.3*x^2-x)/(1+abs(x))+sqrt(x+3)"
    xs = np.linspace(-2.0, 2.0, 41)
    f = scalar_function(src)
    np.testing.assert_array_equal(evaluate_array(src, xs), np.array([f(float(x)) for x in xs]))


def test_evaluation_deterministic():
    e = parse("exp(x)*log(x+2)")
    assert evaluate(e, 0.7) == evaluate(e, 0.7)


def test_nonfinite_literal_rejected():
    with pytest.raises(ParseError):
        parse("1e999")


# random trees for the round-trip property
_leaves = st.one_of(
    st.builds(Number, st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False)),
    st.just(X),
    st.sampled_from([Constant("e"), Constant("pi")]),
)
_trees = st.recursive(
    _leaves,
    lambda kids: st.one_of(
        st.builds(Unary, st.just("neg"), kids),
        st.builds(Binary, st.sampled_from(["add", "sub", "mul", "div", "pow"]), kids, kids),
        st.builds(Call, st.sampled_from(["exp", "log", "sqrt", "abs"]), kids),
    ),
    max_leaves=12,
)


@settings(max_examples=300, deadline=None)
@given(_trees)
def test_round_trip_property(tree):
    assert parse(pretty(tree)) == tree


@settings(max_examples=200, deadline=None)
@given(_trees)
def test_pretty_is_idempotent(tree):
    once = pretty(parse(pretty(tree)))
    assert pretty(parse(once)) == once
