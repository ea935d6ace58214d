"""Tiny arithmetic expression language for custom metrics and product functions.

Grammar: numbers, whitelisted names, ``+ - * / **`` (constant exponents), unary minus
and ``sqrt(.)``.
Expressions are parsed with :mod:`ast` and evaluated by walking the tree, so the
same expression runs on floats, numpy arrays and jets.
"""
from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field

from .jets import sqrt

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sqrt": sqrt}


class ExpressionError(ValueError):
    pass


@dataclass(frozen=True)
class Expression:
    source: str
    names: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc.msg}") from None
        self._check(tree.body)
        object.__setattr__(self, "_tree", tree.body)

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
            if isinstance(node.op, ast.Pow) and not _is_number(node.right):
                raise ExpressionError("exponents must be numeric constants")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ExpressionError("only unary +/- allowed")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS) or len(node.args) != 1 or node.keywords:
                raise ExpressionError("only sqrt(x) calls allowed")
            self._check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id not in self.names:
                raise ExpressionError(f"unknown name {node.id!r}; allowed: {sorted(self.names)}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ExpressionError(f"bad literal {node.value!r}")
        else:
            raise ExpressionError(f"syntax {type(node).__name__} not allowed")

    def evaluate(self, env: dict):
        return _eval(self._tree, env)

    def __call__(self, **env):
        return self.evaluate(env)


def _is_number(node) -> bool:
    """Numeric literal or arithmetic on literals, e.g. ``-1.5`` or ``1/3``."""
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        return _is_number(node.operand)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _is_number(node.left) and _is_number(node.right)
    return isinstance(node, ast.Constant) and isinstance(node.value, (int, float))


def _eval(node, env):
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            return _eval(node.left, env) ** float(_eval(node.right, env))
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](_eval(node.args[0], env))
    if isinstance(node, ast.Name):
        return env[node.id]
    return float(node.value)
