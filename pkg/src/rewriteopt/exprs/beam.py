"""Search baselines: beam search over rewrites and a simple-rule fixpoint."""

from __future__ import annotations

from .ast import Expr, region_set, tree_size
from .evaluator import expr_length
from .ast import print_expr
from .rules import RULE_COUNT, UPHILL_RULES, apply_rule, applicable_rules


def _key(e: Expr) -> tuple[int, int, str]:
    return (expr_length(e), tree_size(e), print_expr(e))


def beam_search_simplify(
    expr: Expr,
    beam_width: int = 4,
    max_steps: int = 12,
    return_visited: bool = False,
):
    """Breadth-limited search for the shortest reachable expression.

    Each step expands every (region, rule) pair of every beam member, drops
    expressions seen before (cycle protection), and keeps the beam_width
    shortest candidates, ranked by (length, tree size, text) for determinism.
    Returns the shortest expression found anywhere, which is never longer
    than the input. With return_visited=True also returns the set of
    canonical strings encountered.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    visited: set[str] = {print_expr(expr)}
    beam: list[Expr] = [expr]
    best = expr
    best_key = _key(expr)
    for _ in range(max_steps):
        candidates: list[Expr] = []
        for e in beam:
            for region in region_set(e):
                for rule in applicable_rules(e, region):
                    ne = apply_rule(e, region, rule)
                    s = print_expr(ne)
                    if s in visited:
                        continue
                    visited.add(s)
                    candidates.append(ne)
        if not candidates:
            break
        candidates.sort(key=_key)
        beam = candidates[:beam_width]
        k = _key(beam[0])
        if k < best_key:
            best, best_key = beam[0], k
    if return_visited:
        return best, visited
    return best


def fixpoint_simplify(expr: Expr, max_steps: int = 1000) -> Expr:
    """Keep applying the first non-uphill rule that strictly shrinks the
    (length, tree size) key, scanning regions in preorder, until none does.

    This is the no-learning baseline: it never takes a move that does not pay
    off immediately, so chains that must pass through longer intermediates
    are out of its reach.
    """
    simple = [r for r in range(RULE_COUNT) if r not in UPHILL_RULES]
    cur = expr
    cur_key = (expr_length(cur), tree_size(cur))
    for _ in range(max_steps):
        improved = False
        for region in region_set(cur):
            for rule in simple:
                from .rules import rule_matches

                if not rule_matches(cur, region, rule):
                    continue
                ne = apply_rule(cur, region, rule)
                k = (expr_length(ne), tree_size(ne))
                if k < cur_key:
                    cur, cur_key = ne, k
                    improved = True
                    break
            if improved:
                break
        if not improved:
            break
    return cur
