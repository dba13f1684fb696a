"""Whitelisted arithmetic expressions for problem-spec files.

Expressions are parsed with the ast module and only a fixed node set is
admitted: arithmetic, powers, unary sign, numeric literals, known names
and calls to a fixed function table.  "^" is accepted as a power alias.
Evaluation vectorizes over numpy arrays bound to the variable names.
"""

from __future__ import annotations

import ast
import math
from typing import Sequence

import numpy as np

from .errors import ExpressionError

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "atan": np.arctan,
    "abs": np.abs,
}

_CONSTS = {"pi": math.pi, "e": math.e}

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARYOPS = (ast.UAdd, ast.USub)


def _validate(node: ast.AST, variables: Sequence[str], path: str) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body, variables, path)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _BINOPS):
            raise ExpressionError(path, f"operator {type(node.op).__name__} not allowed")
        _validate(node.left, variables, path)
        _validate(node.right, variables, path)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _UNARYOPS):
            raise ExpressionError(path, f"operator {type(node.op).__name__} not allowed")
        _validate(node.operand, variables, path)
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError(path, f"literal {node.value!r} not allowed")
    elif isinstance(node, ast.Name):
        if node.id not in variables and node.id not in _CONSTS:
            raise ExpressionError(
                path, f"unknown name {node.id!r}; known: {sorted(variables)} + pi, e")
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExpressionError(path, "only calls to "
                                  f"{sorted(_FUNCS)} are allowed")
        if node.keywords:
            raise ExpressionError(path, "keyword arguments not allowed")
        for arg in node.args:
            _validate(arg, variables, path)
    else:
        raise ExpressionError(path, f"syntax element {type(node).__name__} not allowed")


class Expression:
    """A compiled expression over named array variables."""

    def __init__(self, text: str, variables: Sequence[str], path: str = "expression"):
        self.text = text
        self.variables = tuple(variables)
        self.path = path
        normalized = text.replace("^", "**")
        try:
            tree = ast.parse(normalized, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(path, f"cannot parse {text!r}: {exc.msg}") from exc
        _validate(tree, self.variables, path)
        self._code = compile(tree, f"<{path}>", "eval")

    def __call__(self, **bindings) -> np.ndarray:
        missing = [v for v in self.variables if v not in bindings]
        if missing:
            raise ExpressionError(self.path, f"missing variables {missing}")
        env = dict(_FUNCS)
        env.update(_CONSTS)
        env.update({k: bindings[k] for k in self.variables})
        try:
            out = eval(self._code, {"__builtins__": {}}, env)
        except ZeroDivisionError as exc:
            raise ExpressionError(self.path, f"division by zero in {self.text!r}") from exc
        return np.asarray(out, dtype=np.float64)

    def depends_on(self, name: str) -> bool:
        class Finder(ast.NodeVisitor):
            found = False

            def visit_Name(self, node):
                if node.id == name:
                    self.found = True
        finder = Finder()
        finder.visit(ast.parse(self.text.replace("^", "**"), mode="eval"))
        return finder.found

    def __repr__(self):
        return f"Expression({self.text!r})"


def compile_expression(text: str, variables: Sequence[str],
                       path: str = "expression") -> Expression:
    return Expression(text, variables, path)
