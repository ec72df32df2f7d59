"""Recursive-descent parser for the expression grammar.

Infix operators with the usual precedence (|| < && < comparisons < additive
< multiplicative < !), function syntax for max/min/select, variables v0..v12,
integer literals (optionally negated). Parse errors carry the character
offset. Sort checking (boolean vs arithmetic positions) is structural;
constants are accepted in boolean positions because rewriting produces 0/1
there.
"""

from __future__ import annotations

from .ast import (
    ARITH_OPS,
    BOOL_OPS,
    CMP_OPS,
    CONST_MAX,
    CONST_MIN,
    VAR_NAMES,
    Binary,
    Const,
    Expr,
    Max,
    Min,
    Not,
    Select,
    Var,
    children,
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TWO_CHAR = ("<=", "==", "&&", "||")
_ONE_CHAR = ("+", "-", "*", "/", "%", "<", "!", "(", ")", ",")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Tokens as (kind, value, offset); kind in {num, name, op, end}."""
    toks: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\n":
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
            continue
        if text[i : i + 2] in _TWO_CHAR:
            toks.append(("op", text[i : i + 2], i))
            i += 2
            continue
        if c in _ONE_CHAR:
            toks.append(("op", c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, strict_range: bool):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0
        self.strict_range = strict_range

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.pos]

    def advance(self) -> tuple[str, str, int]:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op: str) -> None:
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", off)
        self.advance()

    # precedence climbing over binary operator tiers
    _TIERS = [BOOL_OPS[1:2], BOOL_OPS[0:1], CMP_OPS, ("+", "-"), ("*", "/", "%")]

    def parse_expr(self, tier: int = 0) -> Expr:
        if tier >= len(self._TIERS):
            return self.parse_unary()
        ops = self._TIERS[tier]
        node = self.parse_expr(tier + 1)
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ops:
                self.advance()
                rhs = self.parse_expr(tier + 1)
                node = Binary(val, node, rhs)
            else:
                return node

    def parse_unary(self) -> Expr:
        kind, val, off = self.peek()
        if kind == "op" and val == "!":
            self.advance()
            return Not(self.parse_unary())
        if kind == "op" and val == "-":
            # unary minus binds to an integer literal only
            nxt = self.toks[self.pos + 1]
            if nxt[0] == "num":
                self.advance()
                self.advance()
                return self._const(-int(nxt[1]), off)
            raise ParseError("unary '-' must precede an integer literal", off)
        return self.parse_primary()

    def _const(self, value: int, off: int) -> Const:
        if self.strict_range and not (CONST_MIN <= value <= CONST_MAX):
            raise ParseError(f"constant {value} outside [{CONST_MIN}, {CONST_MAX}]", off)
        return Const(value)

    def parse_primary(self) -> Expr:
        kind, val, off = self.advance()
        if kind == "num":
            return self._const(int(val), off)
        if kind == "name":
            if val in ("max", "min"):
                self.expect_op("(")
                a = self.parse_expr()
                self.expect_op(",")
                b = self.parse_expr()
                self.expect_op(")")
                return Max(a, b) if val == "max" else Min(a, b)
            if val == "select":
                self.expect_op("(")
                c = self.parse_expr()
                self.expect_op(",")
                a = self.parse_expr()
                self.expect_op(",")
                b = self.parse_expr()
                self.expect_op(")")
                return Select(c, a, b)
            if val in VAR_NAMES:
                return Var(val)
            raise ParseError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input", off)


def _is_boolish(e: Expr) -> bool:
    return (isinstance(e, Binary) and e.op in CMP_OPS + BOOL_OPS) or isinstance(e, Not) or isinstance(e, Const)


def _is_arithish(e: Expr) -> bool:
    return not ((isinstance(e, Binary) and e.op in CMP_OPS + BOOL_OPS) or isinstance(e, Not)) or isinstance(e, Const)


def check_sorts(e: Expr) -> None:
    """Reject trees that put boolean nodes in arithmetic slots or vice versa."""
    if isinstance(e, Binary):
        want_bool = e.op in BOOL_OPS
        ok = (_is_boolish if want_bool else _is_arithish)
        if not (ok(e.lhs) and ok(e.rhs)):
            kind = "boolean" if want_bool else "arithmetic"
            raise ParseError(f"operator {e.op!r} needs {kind} operands", 0)
    elif isinstance(e, Not):
        if not _is_boolish(e.child):
            raise ParseError("'!' needs a boolean operand", 0)
    elif isinstance(e, (Max, Min)):
        if not (_is_arithish(e.a) and _is_arithish(e.b)):
            raise ParseError("max/min need arithmetic operands", 0)
    elif isinstance(e, Select):
        if not _is_boolish(e.cond):
            raise ParseError("select condition must be boolean", 0)
        if not (_is_arithish(e.a) and _is_arithish(e.b)):
            raise ParseError("select branches must be arithmetic", 0)
    for k in children(e):
        check_sorts(k)


def parse(text: str, strict_range: bool = True) -> Expr:
    """Parse canonical or parenthesized text into an AST.

    strict_range=False lifts the [-1024, 1024] constant bound, used when
    re-reading traces whose rewrites folded constants out of range.
    """
    p = _Parser(text, strict_range)
    node = p.parse_expr()
    kind, val, off = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing token {val!r}", off)
    check_sorts(node)
    return node
