from .ast import (
    Binary,
    Const,
    Expr,
    Max,
    Min,
    Not,
    Select,
    Var,
    children,
    node_at,
    preorder,
    print_expr,
    rebuild,
    region_set,
    replace_at,
    tree_size,
)
from .parser import ParseError, parse
from .evaluator import evaluate, expr_length, variables
from .rules import RULE_NAMES, UPHILL_RULES, applicable_rules, apply_rule, rule_matches
from .generator import random_expr
from .beam import beam_search_simplify, fixpoint_simplify
from .domain import ExprDomain

__all__ = [
    "Expr", "Var", "Const", "Binary", "Not", "Max", "Min", "Select",
    "children", "rebuild", "preorder", "node_at", "replace_at", "region_set",
    "print_expr", "tree_size", "parse", "ParseError", "evaluate",
    "expr_length", "variables", "RULE_NAMES", "UPHILL_RULES",
    "applicable_rules", "apply_rule", "rule_matches", "random_expr",
    "beam_search_simplify", "fixpoint_simplify", "ExprDomain",
]
