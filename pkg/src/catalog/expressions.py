"""
Minimal arithmetic expression grammar for custom process specs.

Supported: numbers, one free variable, the constants ``pi`` and ``e``,
operators ``+ - * / ^`` (``**`` also accepted) and the functions
``exp``, ``log``, ``sqrt``, ``pow``. Expressions compile to vectorized numpy
callables; anything else is rejected with ``SpecError``.
"""

import ast
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.errors import SpecError

_FUNCTIONS = {
    'exp': (1, np.exp),
    'log': (1, np.log),
    'sqrt': (1, np.sqrt),
    'pow': (2, np.power),
}
_CONSTANTS = {'pi': np.pi, 'e': np.e}
_BINARY = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


@dataclass(frozen=True, eq=False)
class Expression:
    source: str
    variable: Optional[str]
    evaluator: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            value = self.evaluator(x)
        return np.broadcast_to(np.asarray(value, dtype=float), x.shape).copy()


def _compile(node: ast.AST, names: set) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _compile(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        value = float(node.value)
        return lambda x: value
    if isinstance(node, ast.Name):
        if node.id in _CONSTANTS:
            value = _CONSTANTS[node.id]
            return lambda x: value
        if node.id in _FUNCTIONS:
            raise SpecError(f"Function '{node.id}' used without arguments")
        names.add(node.id)
        return lambda x: x
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        operand = _compile(node.operand, names)
        if isinstance(node.op, ast.USub):
            return lambda x: -operand(x)
        return operand
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        op = _BINARY[type(node.op)]
        left, right = _compile(node.left, names), _compile(node.right, names)
        return lambda x: op(left(x), right(x))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCTIONS:
        arity, func = _FUNCTIONS[node.func.id]
        if node.keywords or len(node.args) != arity:
            raise SpecError(f"'{node.func.id}' takes {arity} argument(s)")
        args = [_compile(arg, names) for arg in node.args]
        return lambda x: func(*(arg(x) for arg in args))
    raise SpecError(f"Unsupported construct in expression: {ast.dump(node)[:60]}")


def parse_expression(source: str) -> Expression:
    """
    Compile an expression string into a vectorized callable

    Args:
        source: e.g. "x^(-4) * exp(-x)"

    Returns:
        Expression

    Raises:
        SpecError: syntax errors, unknown names or more than one free variable
    """
    if not isinstance(source, str) or not source.strip():
        raise SpecError("Expression must be a non-empty string")
    try:
        tree = ast.parse(source.replace('^', '**'), mode='eval')
    except SyntaxError as exc:
        raise SpecError(f"Cannot parse expression '{source}': {exc.msg}") from exc

    names: set = set()
    evaluator = _compile(tree, names)
    if len(names) > 1:
        raise SpecError(f"Expression '{source}' uses more than one variable: {sorted(names)}")
    return Expression(source=source, variable=next(iter(names), None), evaluator=evaluator)
