"""The 19 rewriting-rule categories for expression simplification.

Each category is a function node -> rewritten-node-or-None; None means the
pattern does not match. Every rewrite is semantics-preserving under the
evaluator's integer conventions (floor division, modulo sign follows the
divisor, x/0 = 0, x%0 = 0) — the randomized soundness suite enforces this.

Three categories are uphill (the result can be longer than the input):
div/mul-to-mod expansion (8), min/max comparison expansion (14), and min/max
distribution over +/- (15). They exist because chains like

    5 <= max(v0, 3) + 3   ->   2 <= max(v0, 3)
                          ->   2 <= v0 || 2 <= 3
                          ->   2 <= v0 || 1
                          ->   1

need to pass through longer intermediate expressions.

Within a category, sub-patterns are checked in a fixed order, so rewriting is
deterministic. Boolean-valued operands are recognized structurally
(comparisons, connectives, negation, or the constants 0/1); identity rules
that keep one operand require this shape so that truthiness is preserved.
"""

from __future__ import annotations

from typing import Callable, Optional

from .ast import (
    ARITH_OPS,
    BOOL_OPS,
    CMP_OPS,
    Binary,
    Const,
    Expr,
    Max,
    Min,
    Not,
    Select,
    node_at,
    replace_at,
)
from .evaluator import evaluate


def _is_boolish(e: Expr) -> bool:
    """Structurally guaranteed to evaluate to 0 or 1."""
    if isinstance(e, Binary) and e.op in CMP_OPS + BOOL_OPS:
        return True
    if isinstance(e, Not):
        return True
    return isinstance(e, Const) and e.value in (0, 1)


def _mk_add(a: Expr, b: Expr) -> Expr:
    """a + b, folding constant pairs and normalizing x + (-c) to x - c."""
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(b, Const):
        if b.value == 0:
            return a
        if b.value < 0:
            return Binary("-", a, Const(-b.value))
    return Binary("+", a, b)


def _mk_sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if isinstance(b, Const):
        if b.value == 0:
            return a
        if b.value < 0:
            return Binary("+", a, Const(-b.value))
    return Binary("-", a, b)


def _addend_splits(e: Expr) -> list[tuple[Expr, Expr]]:
    """Ways to read e as (shared_term, remainder) across a top-level +."""
    if isinstance(e, Binary) and e.op == "+":
        return [(e.lhs, e.rhs), (e.rhs, e.lhs)]
    return []


def _fold_arith(n: Expr) -> Optional[Expr]:
    if isinstance(n, Binary) and n.op in ARITH_OPS:
        if isinstance(n.lhs, Const) and isinstance(n.rhs, Const):
            return Const(evaluate(n, {}))
    return None


def _fold_cmp(n: Expr) -> Optional[Expr]:
    if isinstance(n, Binary) and n.op in CMP_OPS:
        if isinstance(n.lhs, Const) and isinstance(n.rhs, Const):
            return Const(evaluate(n, {}))
    return None


def _fold_bool(n: Expr) -> Optional[Expr]:
    if isinstance(n, Binary) and n.op in BOOL_OPS:
        if isinstance(n.lhs, Const) and isinstance(n.rhs, Const):
            return Const(evaluate(n, {}))
    if isinstance(n, Not) and isinstance(n.child, Const):
        return Const(0 if n.child.value != 0 else 1)
    return None


def _add_zero(n: Expr) -> Optional[Expr]:
    if isinstance(n, Binary):
        if n.op == "+":
            if n.rhs == Const(0):
                return n.lhs
            if n.lhs == Const(0):
                return n.rhs
        elif n.op == "-" and n.rhs == Const(0):
            return n.lhs
    return None


def _sub_self(n: Expr) -> Optional[Expr]:
    if isinstance(n, Binary) and n.op == "-" and n.lhs == n.rhs:
        return Const(0)
    return None


def _mul_identity(n: Expr) -> Optional[Expr]:
    if isinstance(n, Binary) and n.op == "*":
        if n.rhs == Const(0) or n.lhs == Const(0):
            return Const(0)
        if n.rhs == Const(1):
            return n.lhs
        if n.lhs == Const(1):
            return n.rhs
    return None


def _div_simplify(n: Expr) -> Optional[Expr]:
    if not (isinstance(n, Binary) and n.op == "/"):
        return None
    if n.rhs == Const(1):
        return n.lhs
    # (x * c) / c -> x, exact for c != 0
    if isinstance(n.rhs, Const) and n.rhs.value != 0 and isinstance(n.lhs, Binary) and n.lhs.op == "*":
        if n.lhs.rhs == n.rhs:
            return n.lhs.lhs
        if n.lhs.lhs == n.rhs:
            return n.lhs.rhs
    return None


def _mod_simplify(n: Expr) -> Optional[Expr]:
    if not (isinstance(n, Binary) and n.op == "%"):
        return None
    if n.rhs == Const(1):
        return Const(0)
    if n.lhs == n.rhs:
        return Const(0)
    # (x * c) % c -> 0; also sound for c = 0 since x % 0 = 0
    if isinstance(n.rhs, Const) and isinstance(n.lhs, Binary) and n.lhs.op == "*":
        if n.lhs.rhs == n.rhs or n.lhs.lhs == n.rhs:
            return Const(0)
    # (x +- c1) % c2 -> (x + (+-c1 mod c2)) % c2 when that shrinks c1
    if isinstance(n.rhs, Const) and isinstance(n.lhs, Binary) and n.lhs.op in ("+", "-"):
        if isinstance(n.lhs.rhs, Const):
            c1 = n.lhs.rhs.value if n.lhs.op == "+" else -n.lhs.rhs.value
            c2 = n.rhs.value
            r = c1 % c2 if c2 != 0 else 0
            if r != c1:
                return Binary("%", _mk_add(n.lhs.lhs, Const(r)), n.rhs)
    return None


def _divmul_to_mod(n: Expr) -> Optional[Expr]:
    # x / c * c -> x - x % c (uphill; enables cancellation across the mod)
    if not (isinstance(n, Binary) and n.op == "*"):
        return None
    for div, c in ((n.lhs, n.rhs), (n.rhs, n.lhs)):
        if (
            isinstance(c, Const)
            and c.value != 0
            and isinstance(div, Binary)
            and div.op == "/"
            and div.rhs == c
        ):
            x = div.lhs
            return Binary("-", x, Binary("%", x, c))
    return None


def _cmp_self(n: Expr) -> Optional[Expr]:
    if isinstance(n, Binary) and n.op in CMP_OPS and n.lhs == n.rhs:
        return Const(0 if n.op == "<" else 1)
    return None


def _not_simplify(n: Expr) -> Optional[Expr]:
    if not isinstance(n, Not):
        return None
    c = n.child
    if isinstance(c, Not):
        return c.child
    if isinstance(c, Binary) and c.op == "<":
        return Binary("<=", c.rhs, c.lhs)
    if isinstance(c, Binary) and c.op == "<=":
        return Binary("<", c.rhs, c.lhs)
    return None


def _bool_identity(n: Expr) -> Optional[Expr]:
    if not (isinstance(n, Binary) and n.op in BOOL_OPS):
        return None
    a, b = n.lhs, n.rhs
    if n.op == "&&":
        if isinstance(b, Const):
            if b.value == 0:
                return Const(0)
            if _is_boolish(a):
                return a
        if isinstance(a, Const):
            if a.value == 0:
                return Const(0)
            if _is_boolish(b):
                return b
        if a == b and _is_boolish(a):
            return a
    else:
        if isinstance(b, Const):
            if b.value != 0:
                return Const(1)
            if _is_boolish(a):
                return a
        if isinstance(a, Const):
            if a.value != 0:
                return Const(1)
            if _is_boolish(b):
                return b
        if a == b and _is_boolish(a):
            return a
    return None


def _minmax_fold(n: Expr) -> Optional[Expr]:
    if not isinstance(n, (Max, Min)):
        return None
    pick = max if isinstance(n, Max) else min
    if n.a == n.b:
        return n.a
    if isinstance(n.a, Const) and isinstance(n.b, Const):
        return Const(pick(n.a.value, n.b.value))
    # combine constants across same-kind nesting: max(max(x, c1), c2)
    kind = type(n)
    for inner, c_out in ((n.a, n.b), (n.b, n.a)):
        if isinstance(c_out, Const) and isinstance(inner, kind):
            for x, c_in in ((inner.a, inner.b), (inner.b, inner.a)):
                if isinstance(c_in, Const):
                    return kind(x, Const(pick(c_in.value, c_out.value)))
    return None


def _select_fold(n: Expr) -> Optional[Expr]:
    if not isinstance(n, Select):
        return None
    if isinstance(n.cond, Const):
        return n.a if n.cond.value != 0 else n.b
    if n.a == n.b:
        return n.a
    return None


def _cmp_minmax_expand(n: Expr) -> Optional[Expr]:
    # min(a,b) < c -> a < c || b < c, etc.; uphill but unlocks comparisons
    if not (isinstance(n, Binary) and n.op in ("<", "<=")):
        return None
    op = n.op
    if isinstance(n.lhs, Min):
        return Binary("||", Binary(op, n.lhs.a, n.rhs), Binary(op, n.lhs.b, n.rhs))
    if isinstance(n.lhs, Max):
        return Binary("&&", Binary(op, n.lhs.a, n.rhs), Binary(op, n.lhs.b, n.rhs))
    if isinstance(n.rhs, Min):
        return Binary("&&", Binary(op, n.lhs, n.rhs.a), Binary(op, n.lhs, n.rhs.b))
    if isinstance(n.rhs, Max):
        return Binary("||", Binary(op, n.lhs, n.rhs.a), Binary(op, n.lhs, n.rhs.b))
    return None


def _minmax_distribute(n: Expr) -> Optional[Expr]:
    # max(a,b) + c -> max(a+c, b+c); c - max(a,b) flips to min (uphill)
    if not (isinstance(n, Binary) and n.op in ("+", "-")):
        return None
    op = n.op
    if isinstance(n.lhs, (Max, Min)):
        kind = type(n.lhs)
        return kind(Binary(op, n.lhs.a, n.rhs), Binary(op, n.lhs.b, n.rhs))
    if isinstance(n.rhs, (Max, Min)):
        flipped = (Min if isinstance(n.rhs, Max) else Max) if op == "-" else type(n.rhs)
        return flipped(Binary(op, n.lhs, n.rhs.a), Binary(op, n.lhs, n.rhs.b))
    return None


def _assoc_const(n: Expr) -> Optional[Expr]:
    if not isinstance(n, Binary):
        return None
    if n.op == "+":
        if isinstance(n.lhs, Const) and not isinstance(n.rhs, Const):
            return Binary("+", n.rhs, n.lhs)
        if isinstance(n.lhs, Binary) and isinstance(n.rhs, Const):
            if n.lhs.op == "+" and isinstance(n.lhs.rhs, Const):
                return _mk_add(n.lhs.lhs, Const(n.lhs.rhs.value + n.rhs.value))
            if n.lhs.op == "-" and isinstance(n.lhs.rhs, Const):
                return _mk_add(n.lhs.lhs, Const(n.rhs.value - n.lhs.rhs.value))
        # (x + c) + t -> x + (c + t): floats the constant toward the root
        if (
            isinstance(n.lhs, Binary)
            and n.lhs.op == "+"
            and isinstance(n.lhs.rhs, Const)
            and not isinstance(n.rhs, Const)
        ):
            return Binary("+", n.lhs.lhs, Binary("+", n.lhs.rhs, n.rhs))
    elif n.op == "-":
        if isinstance(n.lhs, Binary) and isinstance(n.rhs, Const):
            if n.lhs.op == "+" and isinstance(n.lhs.rhs, Const):
                return _mk_add(n.lhs.lhs, Const(n.lhs.rhs.value - n.rhs.value))
            if n.lhs.op == "-" and isinstance(n.lhs.rhs, Const):
                return _mk_sub(n.lhs.lhs, Const(n.lhs.rhs.value + n.rhs.value))
    elif n.op == "*":
        if isinstance(n.lhs, Const) and not isinstance(n.rhs, Const):
            return Binary("*", n.rhs, n.lhs)
        if (
            isinstance(n.lhs, Binary)
            and n.lhs.op == "*"
            and isinstance(n.lhs.rhs, Const)
            and isinstance(n.rhs, Const)
        ):
            return Binary("*", n.lhs.lhs, Const(n.lhs.rhs.value * n.rhs.value))
    return None


def _cmp_shift_const(n: Expr) -> Optional[Expr]:
    # move a constant addend across a comparison: x + c <= B  ->  x <= B - c
    if not (isinstance(n, Binary) and n.op in CMP_OPS):
        return None
    op, lhs, rhs = n.op, n.lhs, n.rhs
    if isinstance(lhs, Binary) and isinstance(lhs.rhs, Const):
        if lhs.op == "+":
            return Binary(op, lhs.lhs, _mk_sub(rhs, lhs.rhs))
        if lhs.op == "-":
            return Binary(op, lhs.lhs, _mk_add(rhs, lhs.rhs))
    if isinstance(lhs, Binary) and lhs.op == "+" and isinstance(lhs.lhs, Const):
        return Binary(op, lhs.rhs, _mk_sub(rhs, lhs.lhs))
    if isinstance(rhs, Binary) and isinstance(rhs.rhs, Const):
        if rhs.op == "+":
            return Binary(op, _mk_sub(lhs, rhs.rhs), rhs.lhs)
        if rhs.op == "-":
            return Binary(op, _mk_add(lhs, rhs.rhs), rhs.lhs)
    if isinstance(rhs, Binary) and rhs.op == "+" and isinstance(rhs.lhs, Const):
        return Binary(op, _mk_sub(lhs, rhs.lhs), rhs.rhs)
    return None


def _cmp_cancel_common(n: Expr) -> Optional[Expr]:
    # drop a shared addend from both sides, or shift a subtracted term over
    if not (isinstance(n, Binary) and n.op in CMP_OPS):
        return None
    op, lhs, rhs = n.op, n.lhs, n.rhs
    for xa, sa in _addend_splits(lhs):
        for xb, tb in _addend_splits(rhs):
            if xa == xb:
                return Binary(op, sa, tb)
    for xb, tb in _addend_splits(rhs):
        if xb == lhs:
            return Binary(op, Const(0), tb)
    for xa, sa in _addend_splits(lhs):
        if xa == rhs:
            return Binary(op, sa, Const(0))
    if isinstance(lhs, Binary) and lhs.op == "-":
        return Binary(op, lhs.lhs, Binary("+", rhs, lhs.rhs))
    if isinstance(rhs, Binary) and rhs.op == "-":
        return Binary(op, Binary("+", lhs, rhs.rhs), rhs.lhs)
    return None


RULES: tuple[Callable[[Expr], Optional[Expr]], ...] = (
    _fold_arith,
    _fold_cmp,
    _fold_bool,
    _add_zero,
    _sub_self,
    _mul_identity,
    _div_simplify,
    _mod_simplify,
    _divmul_to_mod,
    _cmp_self,
    _not_simplify,
    _bool_identity,
    _minmax_fold,
    _select_fold,
    _cmp_minmax_expand,
    _minmax_distribute,
    _assoc_const,
    _cmp_shift_const,
    _cmp_cancel_common,
)

RULE_NAMES: tuple[str, ...] = (
    "fold-arith",
    "fold-cmp",
    "fold-bool",
    "add-zero",
    "sub-self",
    "mul-identity",
    "div-simplify",
    "mod-simplify",
    "divmul-to-mod",
    "cmp-self",
    "not-simplify",
    "bool-identity",
    "minmax-fold",
    "select-fold",
    "cmp-minmax-expand",
    "minmax-distribute",
    "assoc-const",
    "cmp-shift-const",
    "cmp-cancel-common",
)

RULE_COUNT = len(RULES)
UPHILL_RULES: frozenset[int] = frozenset({8, 14, 15})

assert RULE_COUNT == 19


def rewrite_node(node: Expr, rule_id: int) -> Optional[Expr]:
    """Apply a rule category at a node; None when the pattern misses."""
    out = RULES[rule_id](node)
    if out is None or out == node:
        return None
    return out


def rule_matches(expr: Expr, region: int, rule_id: int) -> bool:
    return rewrite_node(node_at(expr, region), rule_id) is not None


def applicable_rules(expr: Expr, region: int) -> list[int]:
    node = node_at(expr, region)
    return [i for i in range(RULE_COUNT) if rewrite_node(node, i) is not None]


def apply_rule(expr: Expr, region: int, rule_id: int) -> Expr:
    node = node_at(expr, region)
    out = rewrite_node(node, rule_id)
    if out is None:
        raise ValueError(f"rule {rule_id} ({RULE_NAMES[rule_id]}) does not match at node {region}")
    return replace_at(expr, region, out)
