"""Grammar-directed random expression sampling.

Samples sort-correct trees, enforces the canonical-length bound, and
rejection-filters irreducible expressions (those where no rule applies
anywhere). Constants are biased small so arithmetic identities actually
fire; variables are drawn from a small pool so shared subterms occur.
"""

from __future__ import annotations

import numpy as np

from .ast import CONST_MAX, Binary, Const, Expr, Max, Min, Select, Var, region_set
from .evaluator import expr_length
from .rules import applicable_rules


def _leaf(rng: np.random.Generator, n_vars: int) -> Expr:
    if rng.random() < 0.6:
        return Var(f"v{int(rng.integers(0, n_vars))}")
    if rng.random() < 0.7:
        return Const(int(rng.integers(-10, 11)))
    return Const(int(rng.integers(-CONST_MAX, CONST_MAX + 1)))


def _gen_arith(rng: np.random.Generator, depth: int, n_vars: int) -> Expr:
    if depth <= 1:
        return _leaf(rng, n_vars)
    r = rng.random()
    if r < 0.15:
        return _leaf(rng, n_vars)
    if r < 0.70:
        op = ("+", "-", "*", "/", "%")[int(rng.integers(0, 5))]
        return Binary(op, _gen_arith(rng, depth - 1, n_vars), _gen_arith(rng, depth - 1, n_vars))
    if r < 0.90:
        kind = Max if rng.random() < 0.5 else Min
        return kind(_gen_arith(rng, depth - 1, n_vars), _gen_arith(rng, depth - 1, n_vars))
    return Select(
        _gen_bool(rng, depth - 1, n_vars),
        _gen_arith(rng, depth - 1, n_vars),
        _gen_arith(rng, depth - 1, n_vars),
    )


def _gen_bool(rng: np.random.Generator, depth: int, n_vars: int) -> Expr:
    if depth <= 2:
        op = ("<", "<=", "==")[int(rng.integers(0, 3))]
        return Binary(op, _leaf(rng, n_vars), _leaf(rng, n_vars))
    r = rng.random()
    if r < 0.5:
        op = ("<", "<=", "==")[int(rng.integers(0, 3))]
        return Binary(op, _gen_arith(rng, depth - 1, n_vars), _gen_arith(rng, depth - 1, n_vars))
    if r < 0.8:
        op = "&&" if rng.random() < 0.5 else "||"
        return Binary(op, _gen_bool(rng, depth - 1, n_vars), _gen_bool(rng, depth - 1, n_vars))
    return Binary(
        "&&" if rng.random() < 0.5 else "||",
        _gen_bool(rng, depth - 1, n_vars),
        _gen_bool(rng, depth - 1, n_vars),
    ) if r < 0.85 else _not(rng, depth, n_vars)


def _not(rng: np.random.Generator, depth: int, n_vars: int) -> Expr:
    from .ast import Not

    return Not(_gen_bool(rng, depth - 1, n_vars))


def _reducible(e: Expr) -> bool:
    return any(applicable_rules(e, r) for r in region_set(e))


def random_expr(
    rng: np.random.Generator,
    max_depth: int = 5,
    max_length: int = 30,
    n_vars: int = 5,
    require_reducible: bool = True,
) -> Expr:
    """Sample one expression within the depth and canonical-length bounds."""
    if max_depth < 1 or max_length < 1:
        raise ValueError("bounds must be positive")
    while True:
        if max_depth == 1:
            e: Expr = _leaf(rng, n_vars)
        elif rng.random() < 0.5:
            e = _gen_bool(rng, max_depth, n_vars)
        else:
            e = _gen_arith(rng, max_depth, n_vars)
        if expr_length(e) > max_length:
            continue
        if require_reducible and not _reducible(e):
            if max_depth == 1:
                return e
            continue
        return e
