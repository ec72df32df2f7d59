"""Expression AST: immutable nodes, canonical printing, subtree indexing.

The grammar covers integer arithmetic (+ - * / %), comparisons (< <= ==),
boolean connectives (&& || !), max/min/select calls, variables v0..v12, and
integer constants. Nodes are frozen dataclasses, so structural equality and
hashing come for free and rewriting always builds new trees.
"""

from __future__ import annotations

from dataclasses import dataclass

ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("<", "<=", "==")
BOOL_OPS = ("&&", "||")
BINARY_OPS = ARITH_OPS + CMP_OPS + BOOL_OPS

VAR_NAMES = tuple(f"v{i}" for i in range(13))
CONST_MIN, CONST_MAX = -1024, 1024


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    value: int


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Not(Expr):
    child: Expr


@dataclass(frozen=True)
class Max(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Min(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Select(Expr):
    cond: Expr
    a: Expr
    b: Expr


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Binary):
        return (e.lhs, e.rhs)
    if isinstance(e, Not):
        return (e.child,)
    if isinstance(e, (Max, Min)):
        return (e.a, e.b)
    if isinstance(e, Select):
        return (e.cond, e.a, e.b)
    return ()


def rebuild(e: Expr, kids: tuple[Expr, ...]) -> Expr:
    if isinstance(e, Binary):
        return Binary(e.op, kids[0], kids[1])
    if isinstance(e, Not):
        return Not(kids[0])
    if isinstance(e, Max):
        return Max(kids[0], kids[1])
    if isinstance(e, Min):
        return Min(kids[0], kids[1])
    if isinstance(e, Select):
        return Select(kids[0], kids[1], kids[2])
    return e


def preorder(e: Expr) -> list[Expr]:
    """All nodes in preorder; index in this list is the node's id."""
    out: list[Expr] = []
    stack = [e]
    while stack:
        n = stack.pop()
        out.append(n)
        stack.extend(reversed(children(n)))
    return out


def node_at(e: Expr, index: int) -> Expr:
    nodes = preorder(e)
    if index < 0 or index >= len(nodes):
        raise IndexError(f"node index {index} out of range (tree has {len(nodes)} nodes)")
    return nodes[index]


def replace_at(e: Expr, index: int, replacement: Expr) -> Expr:
    """Return a new tree with the preorder-index subtree replaced."""

    def rec(node: Expr, pos: int) -> tuple[Expr, int]:
        if pos == index:
            return replacement, pos + _count(node)
        kids = children(node)
        if not kids:
            return node, pos + 1
        cur = pos + 1
        new_kids = []
        changed = False
        for k in kids:
            nk, cur = rec(k, cur)
            changed = changed or (nk is not k)
            new_kids.append(nk)
        return (rebuild(node, tuple(new_kids)) if changed else node), cur

    def _count(node: Expr) -> int:
        return 1 + sum(_count(k) for k in children(node))

    if index < 0:
        raise IndexError(f"node index {index} out of range")
    new_root, total = rec(e, 0)
    if index >= total:
        raise IndexError(f"node index {index} out of range (tree has {total} nodes)")
    return new_root


def tree_size(e: Expr) -> int:
    return len(preorder(e))


def region_set(e: Expr) -> list[int]:
    """Preorder indices of all internal (non-leaf) nodes."""
    return [i for i, n in enumerate(preorder(e)) if children(n)]


# Larger number binds tighter. Unary ! sits above all binary operators.
_PREC = {"||": 1, "&&": 2, "<": 3, "<=": 3, "==": 3, "+": 4, "-": 4, "*": 5, "/": 5, "%": 5}
_ATOM_PREC = 10
_NOT_PREC = 6


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Not):
        return _NOT_PREC
    return _ATOM_PREC


def print_expr(e: Expr) -> str:
    """Canonical text: single spaces around binary operators, parentheses
    only where precedence or left-associativity requires them."""
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Not):
        inner = print_expr(e.child)
        if _prec(e.child) < _NOT_PREC:
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(e, Max):
        return f"max({print_expr(e.a)}, {print_expr(e.b)})"
    if isinstance(e, Min):
        return f"min({print_expr(e.a)}, {print_expr(e.b)})"
    if isinstance(e, Select):
        return f"select({print_expr(e.cond)}, {print_expr(e.a)}, {print_expr(e.b)})"
    assert isinstance(e, Binary)
    p = _PREC[e.op]
    left = print_expr(e.lhs)
    if _prec(e.lhs) < p:
        left = f"({left})"
    right = print_expr(e.rhs)
    # binary operators associate left; a right child at equal precedence
    # needs parentheses to survive a round-trip
    if _prec(e.rhs) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"
