"""Integer evaluation semantics and the length cost metric.

Division is floor division and modulo takes the divisor's sign (so the
identity x == (x / y) * y + x % y holds); division or modulo by zero yields
zero. Comparisons and boolean connectives return 1/0; any nonzero value
counts as true in a boolean position.
"""

from __future__ import annotations

from .ast import Binary, Const, Expr, Max, Min, Not, Select, Var, children, print_expr


def evaluate(expr: Expr, assignment: dict[str, int]) -> int:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in assignment:
            raise KeyError(f"no binding for variable {expr.name}")
        return assignment[expr.name]
    if isinstance(expr, Not):
        return 0 if evaluate(expr.child, assignment) != 0 else 1
    if isinstance(expr, Max):
        return max(evaluate(expr.a, assignment), evaluate(expr.b, assignment))
    if isinstance(expr, Min):
        return min(evaluate(expr.a, assignment), evaluate(expr.b, assignment))
    if isinstance(expr, Select):
        if evaluate(expr.cond, assignment) != 0:
            return evaluate(expr.a, assignment)
        return evaluate(expr.b, assignment)
    assert isinstance(expr, Binary)
    a = evaluate(expr.lhs, assignment)
    b = evaluate(expr.rhs, assignment)
    op = expr.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a // b if b != 0 else 0
    if op == "%":
        return a % b if b != 0 else 0
    if op == "<":
        return 1 if a < b else 0
    if op == "<=":
        return 1 if a <= b else 0
    if op == "==":
        return 1 if a == b else 0
    if op == "&&":
        return 1 if (a != 0 and b != 0) else 0
    if op == "||":
        return 1 if (a != 0 or b != 0) else 0
    raise ValueError(f"unknown operator {op!r}")


def expr_length(expr: Expr) -> int:
    """Character count of the canonical print (the cost metric)."""
    return len(print_expr(expr))


def variables(expr: Expr) -> list[str]:
    """Variable names appearing in the tree, sorted."""
    seen: set[str] = set()
    stack = [expr]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            seen.add(n.name)
        stack.extend(children(n))
    return sorted(seen)
