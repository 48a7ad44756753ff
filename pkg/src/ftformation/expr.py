"""A small arithmetic expression language for time-varying scenario terms.

Grammar: numbers, the variables handed to :func:`compile_expr` (``t`` by
default), the constants ``pi`` and ``e``, the operators ``+ - * / ^ **``,
parentheses and the functions ``sin cos tan exp sqrt abs tanh``.
Expressions are evaluated with numpy so they accept scalars or arrays.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

__all__ = ["ExprError", "Expr", "compile_expr", "constant"]

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
}
_CONSTS = {"pi": float(np.pi), "e": float(np.e)}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY = (ast.UAdd, ast.USub)


class ExprError(ValueError):
    pass


@dataclass(frozen=True)
class Expr:
    source: str
    variables: tuple[str, ...]
    _code: object
    is_constant: bool

    def __call__(self, **values):
        env = dict(_CONSTS)
        env.update(_FUNCS)
        env.update(values)
        return eval(self._code, {"__builtins__": {}}, env)  # noqa: S307 - AST is whitelisted

    def at(self, t):
        """Evaluate with ``t`` only, broadcasting constants over array input."""
        val = self(t=t)
        if self.is_constant and np.ndim(t):
            return np.full(np.shape(t), float(val))
        return val

    def __str__(self) -> str:
        return self.source


def _check(node: ast.AST, allowed: set[str], source: str) -> bool:
    """Validate the tree; returns True when no variable occurs."""

    def fail(n, msg):
        col = getattr(n, "col_offset", 0) + 1
        raise ExprError(f"{msg} at column {col} in {source!r}")

    if isinstance(node, ast.Expression):
        return _check(node.body, allowed, source)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            fail(node, "only numeric literals are allowed")
        return True
    if isinstance(node, ast.Name):
        if node.id in allowed:
            return False
        if node.id in _CONSTS:
            return True
        fail(node, f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp):
        if not isinstance(node.op, _BINOPS):
            fail(node, "unsupported operator")
        a = _check(node.left, allowed, source)
        b = _check(node.right, allowed, source)
        return a and b
    if isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _UNARY):
            fail(node, "unsupported unary operator")
        return _check(node.operand, allowed, source)
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            fail(node, "unknown function")
        if node.keywords or len(node.args) != 1:
            fail(node, f"{node.func.id} takes exactly one argument")
        return _check(node.args[0], allowed, source)
    fail(node, f"unsupported syntax {type(node).__name__}")
    return False


def compile_expr(source, variables=("t",)) -> Expr:
    """Compile ``source`` (a string or a number) into an :class:`Expr`."""
    if isinstance(source, (int, float)) and not isinstance(source, bool):
        text = repr(float(source))
    elif isinstance(source, str):
        text = source.strip()
    else:
        raise ExprError(f"expected an expression string or number, got {type(source).__name__}")
    if not text:
        raise ExprError("empty expression")
    py = text.replace("^", "**")
    try:
        tree = ast.parse(py, mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"syntax error at column {exc.offset or 0} in {text!r}") from None
    const = _check(tree, set(variables), text)
    code = compile(tree, "<expr>", "eval")
    return Expr(text, tuple(variables), code, const)


def constant(value: float) -> Expr:
    return compile_expr(float(value))
