"""Expression simplification as a rewriting domain.

State: an AST. Regions: internal nodes by preorder index. Rules: the 19
categories. Cost: canonical print length.
"""

from __future__ import annotations

from ..core.domain import Domain
from .ast import Expr, print_expr, region_set
from .evaluator import expr_length
from .parser import parse
from .rules import RULE_COUNT, apply_rule, rule_matches


class ExprDomain(Domain):
    name = "expr"

    def region_set(self, state: Expr) -> list[int]:
        return region_set(state)

    def rule_count(self, state: Expr) -> int:
        return RULE_COUNT

    def applicable(self, state: Expr, region: int, rule: int) -> bool:
        return rule_matches(state, region, rule)

    def apply(self, state: Expr, region: int, rule: int) -> Expr:
        return apply_rule(state, region, rule)

    def cost(self, state: Expr) -> float:
        return float(expr_length(state))

    def serialize_state(self, state: Expr) -> str:
        return print_expr(state)

    def deserialize_state(self, obj: str) -> Expr:
        return parse(obj, strict_range=False)
