import numpy as np
import pytest

from ftformation.expr import ExprError, compile_expr, constant


def test_basic_evaluation():
    e = compile_expr("0.2*sin(t) + 0.4")
    assert e.at(np.pi / 2) == pytest.approx(0.6)
    assert compile_expr("t^2").at(3.0) == 9.0
    assert compile_expr("cos(pi)").is_constant


def test_constants_broadcast():
    np.testing.assert_array_equal(constant(2.5).at(np.zeros(4)), np.full(4, 2.5))
    assert compile_expr(3).at(1.0) == 3.0


def test_multiple_variables():
    e = compile_expr("x1_1 * t - exp(x2_1)", variables=("t", "x1_1", "x2_1"))
    assert e(t=2.0, x1_1=3.0, x2_1=0.0) == 5.0


@pytest.mark.parametrize(
    "src, msg",
    [
        ("__import__('os')", "unknown function"),
        ("t.real", "unsupported syntax"),
        ("y + 1", "unknown name"),
        ("sin(t, t)", "exactly one argument"),
        ("t +", "syntax error"),
        ("", "empty"),
        ("'a'", "numeric literals"),
        ("t % 2", "unsupported operator"),
    ],
)
def test_rejections(src, msg):
    with pytest.raises(ExprError, match=msg):
        compile_expr(src)


def test_rejects_non_string():
    with pytest.raises(ExprError):
        compile_expr([1, 2])
