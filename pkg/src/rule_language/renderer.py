"""
Canonical rendering of rule trees back to rule text.

Tokens are separated by single spaces, one statement per line, blocks indented by
two spaces. Parentheses are emitted only where precedence or associativity needs
them, so parse(tokenize(render(a))) == a for every tree.
"""
from typing import List, Sequence, Tuple

from .lexer import RuleSource
from .nodes import (
    Binary, BoolLit, Emit, Expr, Ident, If, IntLit, Let, MilieuCount, MilieuIndex,
    MilieuSum, RuleAst, StateRef, Stmt, Unary
)

_PRECEDENCE = {
    "or": 1, "and": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}
_COMPARISON_LEVEL = 3
_UNARY_LEVEL = 6
_ATOM_LEVEL = 7
INDENT = "  "


def _expr(e: Expr) -> Tuple[str, int]:
    if isinstance(e, IntLit):
        return str(e.value), _ATOM_LEVEL
    if isinstance(e, BoolLit):
        return ("true" if e.value else "false"), _ATOM_LEVEL
    if isinstance(e, StateRef):
        return "entityState", _ATOM_LEVEL
    if isinstance(e, MilieuSum):
        return "milieuSum", _ATOM_LEVEL
    if isinstance(e, MilieuCount):
        return "milieuCount", _ATOM_LEVEL
    if isinstance(e, Ident):
        return e.name, _ATOM_LEVEL
    if isinstance(e, MilieuIndex):
        return f"milieu [ {render_expression(e.index)} ]", _ATOM_LEVEL
    if isinstance(e, Unary):
        return f"{e.op} {_wrapped(e.operand, _UNARY_LEVEL)}", _UNARY_LEVEL
    if isinstance(e, Binary):
        level = _PRECEDENCE[e.op]
        left_min = level + 1 if level == _COMPARISON_LEVEL else level
        text = f"{_wrapped(e.left, left_min)} {e.op} {_wrapped(e.right, level + 1)}"
        return text, level
    raise TypeError(f"not an expression node: {e!r}")


def _wrapped(e: Expr, min_level: int) -> str:
    text, level = _expr(e)
    if level < min_level:
        return f"( {text} )"
    return text


def render_expression(e: Expr) -> str:
    return _expr(e)[0]


def _statement_lines(stmt: Stmt, depth: int) -> List[str]:
    pad = INDENT * depth
    if isinstance(stmt, Let):
        return [f"{pad}let {stmt.name} = {render_expression(stmt.expr)} ;"]
    if isinstance(stmt, Emit):
        return [f"{pad}emit {render_expression(stmt.expr)} ;"]
    if isinstance(stmt, If):
        lines = [f"{pad}if {render_expression(stmt.cond)} {{"]
        for inner in stmt.then:
            lines.extend(_statement_lines(inner, depth + 1))
        if stmt.orelse is None:
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}}} else {{")
            for inner in stmt.orelse:
                lines.extend(_statement_lines(inner, depth + 1))
            lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"not a statement node: {stmt!r}")


def render_statements(statements: Sequence[Stmt]) -> str:
    lines: List[str] = []
    for stmt in statements:
        lines.extend(_statement_lines(stmt, 0))
    return "\n".join(lines)


def render(ast: RuleAst) -> RuleSource:
    """Canonical rule text for a tree; deterministic"""
    return RuleSource(render_statements(ast.statements))
