import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvd.expr import BinOp, Expr, ExprEvalError, ExprSyntaxError, Neg, Num, Var, evaluate, parse, to_string


def ev(text, p=(0.0, 0.0)):
    return evaluate(parse(text), p)


def test_precedence_examples():
    assert ev("1 + 2*3") == 7.0
    assert ev("2^3^2") == 512.0
    assert ev("-x1^2", (2.0, 0.0)) == -4.0
    assert ev("x1 + 3*x2", (1.0, 2.0)) == 7.0
    assert ev("sin(pi*x1)*sin(pi*x2)", (0.5, 0.5)) == pytest.approx(1.0, abs=1e-15)


def test_tree_shapes():
    t = parse("sin(pi*x1)*sin(pi*x2)")
    variables = []

    def walk(n):
        if isinstance(n, Var):
            variables.append(n.name)
        for child in ("operand", "left", "right", "arg"):
            if hasattr(n, child):
                walk(getattr(n, child))

    walk(t)
    assert sorted(variables) == ["x1", "x2"]
    assert parse("-x1^2") == Neg(BinOp("^", Var("x1"), Num(2.0)))
    assert parse("8 - 2 - 1") == BinOp("-", BinOp("-", Num(8.0), Num(2.0)), Num(1.0))
    assert ev("8 / 4 / 2") == 1.0
    assert ev("2^-1") == 0.5
    assert ev("--3") == 3.0


def test_functions():
    assert ev("exp(0) + sqrt(16) + abs(-2) + cos(0)") == 1 + 4 + 2 + 1


@pytest.mark.parametrize("text", ["1+", "(1", "1)", "sin 1", "foo", "1 $ 2", "2x1", "", "   ", "sin()",
                                  "1 2", "x3", "pi(1)", "*2", "((x1)", "1e", "2^", "exp(1", "1..2", "sqrt(x1,)"])
def test_malformed_rejected_with_position(text):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert 0 <= info.value.pos <= len(text)


def test_error_positions():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1 + foo")
    assert info.value.pos == 4
    with pytest.raises(ExprSyntaxError) as info:
        parse("(1 + 2")
    assert info.value.pos == 6


def test_evaluation_errors():
    with pytest.raises(ExprEvalError, match="division by zero") as info:
        ev("1 + 1/(x1 - 1)", (1.0, 0.0))
    assert info.value.pos == 5
    with pytest.raises(ExprEvalError, match="sqrt"):
        ev("sqrt(x1)", (-1.0, 0.0))
    with pytest.raises(ExprEvalError, match="power"):
        ev("(-8)^(1/3)")


CORPUS = [
    "1", "x1", "x2", "pi", "-x1", "1 + 2*3", "2^3^2", "-x1^2", "(x1 + x2)^2", "sin(pi*x1)*sin(pi*x2)",
    "cos(x1) - sin(x2)", "exp(-x1*x2)", "sqrt(x1^2 + x2^2)", "abs(x1 - x2)", "1/(1 + x1^2)",
    "(2*pi^2+1)*sin(pi*x1)*sin(pi*x2)", "1 + x1", "1 + x2^2", "x1*x2*x1/x2", "--x1", "2^-x1",
    "-(x1 + 1)*(x2 - 1)", "0.5e-3*x1", "3.25", ".5 + 1.", "sin(cos(exp(x1)))", "x1 - x2 - 1",
    "x1 / x2 / 3", "(((x1)))", "-2^-2", "pi*pi/pi", "abs(-abs(-x1))", "1e3 + 1E-3", "x2^x1^2",
    "sqrt(2)*x1", "exp(x1)^2", "-sin(x1)^2", "cos(pi*x1)*sin(pi*x2)", "sin(pi*x2)*sin(pi*x1)^2",
    "pi^2*cos(pi*x2)*sin(2*pi*x1)", "(pi^2 + 1)*sin(pi*x2)*sin(pi*x1)^2", "1 - x1*(1 - x1)",
    "4*x1*(1 - x1)*x2*(1 - x2)", "x1 + -x2", "x1 * -x2", "2 * (3 + 4) ^ 2", "-(-(-1))",
    "exp(-((x1 - 0.5)^2 + (x2 - 0.5)^2)/0.01)", "1/3", "abs(x1)^0.5",
]


def test_corpus_size():
    assert len(CORPUS) == 50


@pytest.mark.parametrize("text", CORPUS)
def test_round_trip(text):
    tree = parse(text)
    again = parse(to_string(tree))
    assert again == tree
    p = (0.3, 0.7)
    a, b = evaluate(tree, p), evaluate(again, p)
    assert a == b or (math.isnan(a) and math.isnan(b))


@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(allow_nan=False, allow_infinity=False))
def test_variable_identity(x, y):
    assert evaluate(parse("x1"), (x, y)) == x
    assert evaluate(parse("x2"), (x, y)) == y


def test_vectorized_callable():
    f = Expr("x1 + 2*x2")
    np.testing.assert_array_equal(f(np.array([1.0, 2.0]), np.array([0.0, 1.0])), [1.0, 4.0])
    np.testing.assert_array_equal(Expr("3")(np.zeros(4), np.zeros(4)), [3, 3, 3, 3])
    assert repr(f) == "Expr('x1 + 2*x2')"
