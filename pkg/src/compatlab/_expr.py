"""Arithmetic expressions from config files, compiled to vectorised numpy callables.

Only numbers, named variables, ``+ - * / **``, unary signs and a whitelist of
numpy functions are accepted; anything else raises ``ExprError``.
"""
from __future__ import annotations

import ast
import operator

import numpy as np


class ExprError(ValueError):
    pass


FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs, "tanh": np.tanh, "sign": np.sign, "minimum": np.minimum, "maximum": np.maximum,
    "clip": np.clip,
}
CONSTS = {"pi": np.pi, "e": np.e}
BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
          ast.Div: operator.truediv, ast.Pow: operator.pow}
UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _check(node, names):
    if isinstance(node, ast.Expression):
        return _check(node.body, names)
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExprError(f"only numeric literals allowed, got {node.value!r}")
    elif isinstance(node, ast.Name):
        if node.id not in names and node.id not in CONSTS:
            raise ExprError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in BINOPS:
            raise ExprError(f"operator {type(node.op).__name__} not allowed")
        _check(node.left, names)
        _check(node.right, names)
    elif isinstance(node, ast.UnaryOp):
        if type(node.op) not in UNOPS:
            raise ExprError(f"operator {type(node.op).__name__} not allowed")
        _check(node.operand, names)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCS or node.keywords:
            raise ExprError("only whitelisted functions with positional arguments")
        for a in node.args:
            _check(a, names)
    else:
        raise ExprError(f"syntax {type(node).__name__} not allowed")


def _eval(node, env):
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        return env[node.id] if node.id in env else CONSTS[node.id]
    if isinstance(node, ast.BinOp):
        return BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return UNOPS[type(node.op)](_eval(node.operand, env))
    return FUNCS[node.func.id](*(_eval(a, env) for a in node.args))


def compile_expr(src, variables, params=None):
    """``f(**vars) -> value`` for a string (or plain number) expression."""
    params = dict(params or {})
    if isinstance(src, (int, float)) and not isinstance(src, bool):
        return lambda **_: float(src)
    if not isinstance(src, str):
        raise ExprError(f"expression must be a string or number, got {type(src).__name__}")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {src!r}: {exc.msg}") from exc
    _check(tree, set(variables) | set(params))

    def fn(**env):
        return _eval(tree.body, {**params, **env})

    return fn


def state_function(exprs, dims: int, params=None):
    """Compile a (nested) list of expressions in the state ``x`` (``x0, x1, ...``; ``x`` when
    ``dims == 1``) into ``F(x: (P, d)) -> array`` shaped like the nesting, with paths first."""
    names = [f"x{i}" for i in range(dims)] + (["x"] if dims == 1 else [])
    shape = np.shape(np.asarray(exprs, dtype=object))
    flat = [compile_expr(e, names, params) for e in np.asarray(exprs, dtype=object).ravel()]

    def F(x):
        env = {f"x{i}": x[:, i] for i in range(dims)}
        if dims == 1:
            env["x"] = x[:, 0]
        cols = [np.broadcast_to(np.asarray(f(**env), dtype=np.float64), (x.shape[0],)) for f in flat]
        return np.stack(cols, axis=1).reshape((x.shape[0],) + shape)

    return F
