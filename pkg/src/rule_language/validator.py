"""
Static validation of rule trees.

validate() turns a RuleAst into a RuleProgram for one state domain and milieu size:

    - identifiers match identifier<digits> and are let-bound before use
    - operand and operator types agree; the emitted value has the domain's type
    - an emit is reached on every path (the final statement is an emit, or a final
      if/else whose branches both end that way)
    - constant milieu indices satisfy 0 <= index < milieuCount

Blocks open a scope: a let inside a block is visible to the statements after it in
that block only.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import ValidationError, ValidationIssue
from ..metamodel.states import StateDomain
from .nodes import (
    Binary, BoolLit, Emit, Expr, Ident, If, IntLit, Let, MilieuCount, MilieuIndex,
    MilieuSum, Path, RuleAst, StateRef, Stmt, Unary, node_count
)
from .vocabulary import IDENTIFIER_PATTERN

ARITHMETIC_OPS = frozenset({"+", "-", "*", "/", "%"})
ORDERING_OPS = frozenset({"<", "<=", ">", ">="})
EQUALITY_OPS = frozenset({"==", "!="})
LOGICAL_OPS = frozenset({"and", "or"})


class ExprType(str, Enum):
    INT = "int"
    BOOL = "bool"


def domain_type(domain: StateDomain) -> ExprType:
    return ExprType.BOOL if domain.is_boolean else ExprType.INT


Scope = Dict[str, ExprType]
FrozenScope = Tuple[Tuple[str, ExprType], ...]


@dataclass(frozen=True)
class RuleProgram:
    """A tree that passed validation, with the context it was validated for"""

    ast: RuleAst
    domain: StateDomain
    milieu_count: int
    node_count: int


@dataclass(frozen=True)
class ExpressionSite:
    path: Path
    node: Expr
    type: ExprType
    scope: FrozenScope
    in_index: bool


@dataclass(frozen=True)
class StatementSite:
    block_path: Path
    index: int
    block_length: int
    scope: FrozenScope

    @property
    def is_final(self) -> bool:
        return self.index == self.block_length - 1


@dataclass
class ProgramSites:
    expressions: List[ExpressionSite]
    statements: List[StatementSite]


def constant_index(e: Expr) -> Optional[int]:
    """Value of a literal milieu index (optionally negated), else None"""
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, IntLit):
        return -e.operand.value
    return None


def always_emits(statements: Sequence[Stmt]) -> bool:
    """Conservative emit reachability"""
    if not statements:
        return False
    last = statements[-1]
    if isinstance(last, Emit):
        return True
    if isinstance(last, If) and last.orelse is not None:
        return always_emits(last.then) and always_emits(last.orelse)
    return False


class _Checker:
    def __init__(self, domain: StateDomain, milieu_count: int, record: bool = False):
        self.domain = domain
        self.state_type = domain_type(domain)
        self.milieu_count = milieu_count
        self.sites: Optional[ProgramSites] = ProgramSites([], []) if record else None

    # ==== Statements ====

    def block(self, statements: Sequence[Stmt], path: Path, scope: Scope) -> None:
        scope = dict(scope)
        for i, stmt in enumerate(statements):
            if self.sites is not None:
                self.sites.statements.append(
                    StatementSite(path, i, len(statements), tuple(sorted(scope.items())))
                )
            self.statement(stmt, path + (i,), scope)

    def statement(self, stmt: Stmt, path: Path, scope: Scope) -> None:
        if isinstance(stmt, Let):
            if not IDENTIFIER_PATTERN.fullmatch(stmt.name):
                raise ValidationError(ValidationIssue.BAD_IDENTIFIER,
                                      f"{stmt.name!r} does not match identifier<digits>")
            scope[stmt.name] = self.expr(stmt.expr, path + ("expr",), scope)
        elif isinstance(stmt, If):
            cond = self.expr(stmt.cond, path + ("cond",), scope)
            if cond is not ExprType.BOOL:
                raise ValidationError(ValidationIssue.TYPE_MISMATCH, "if condition must be boolean")
            self.block(stmt.then, path + ("then",), scope)
            if stmt.orelse is not None:
                self.block(stmt.orelse, path + ("orelse",), scope)
        elif isinstance(stmt, Emit):
            emitted = self.expr(stmt.expr, path + ("expr",), scope)
            if emitted is not self.state_type:
                raise ValidationError(
                    ValidationIssue.TYPE_MISMATCH,
                    f"emit produces {emitted.value} but state domain {self.domain} needs {self.state_type.value}"
                )
        else:
            raise TypeError(f"not a statement node: {stmt!r}")

    # ==== Expressions ====

    def expr(self, e: Expr, path: Path, scope: Scope, in_index: bool = False) -> ExprType:
        t = self._infer(e, path, scope)
        if self.sites is not None:
            self.sites.expressions.append(
                ExpressionSite(path, e, t, tuple(sorted(scope.items())), in_index)
            )
        return t

    def _infer(self, e: Expr, path: Path, scope: Scope) -> ExprType:
        if isinstance(e, IntLit):
            return ExprType.INT
        if isinstance(e, BoolLit):
            return ExprType.BOOL
        if isinstance(e, StateRef):
            return self.state_type
        if isinstance(e, (MilieuSum, MilieuCount)):
            return ExprType.INT
        if isinstance(e, Ident):
            if not IDENTIFIER_PATTERN.fullmatch(e.name):
                raise ValidationError(ValidationIssue.BAD_IDENTIFIER,
                                      f"{e.name!r} does not match identifier<digits>")
            if e.name not in scope:
                raise ValidationError(ValidationIssue.BAD_IDENTIFIER, f"{e.name} is used before its let")
            return scope[e.name]
        if isinstance(e, MilieuIndex):
            index_type = self.expr(e.index, path + ("index",), scope, in_index=True)
            if index_type is not ExprType.INT:
                raise ValidationError(ValidationIssue.TYPE_MISMATCH, "milieu index must be an integer")
            k = constant_index(e.index)
            if k is not None and not 0 <= k < self.milieu_count:
                raise ValidationError(
                    ValidationIssue.MILIEU_INDEX_OUT_OF_RANGE,
                    f"milieu [ {k} ] with milieuCount {self.milieu_count}"
                )
            return self.state_type
        if isinstance(e, Unary):
            operand = self.expr(e.operand, path + ("operand",), scope)
            expected = ExprType.BOOL if e.op == "not" else ExprType.INT
            if operand is not expected:
                raise ValidationError(ValidationIssue.TYPE_MISMATCH,
                                      f"'{e.op}' needs {expected.value}, got {operand.value}")
            return expected
        if isinstance(e, Binary):
            left = self.expr(e.left, path + ("left",), scope)
            right = self.expr(e.right, path + ("right",), scope)
            return self._binary(e.op, left, right)
        raise TypeError(f"not an expression node: {e!r}")

    @staticmethod
    def _binary(op: str, left: ExprType, right: ExprType) -> ExprType:
        if op in LOGICAL_OPS:
            if left is ExprType.BOOL and right is ExprType.BOOL:
                return ExprType.BOOL
        elif op in EQUALITY_OPS:
            if left is right:
                return ExprType.BOOL
        elif op in ORDERING_OPS:
            if left is ExprType.INT and right is ExprType.INT:
                return ExprType.BOOL
        elif op in ARITHMETIC_OPS:
            if left is ExprType.INT and right is ExprType.INT:
                return ExprType.INT
        else:
            raise TypeError(f"unknown operator {op!r}")
        raise ValidationError(ValidationIssue.TYPE_MISMATCH,
                              f"'{op}' cannot combine {left.value} and {right.value}")


def validate(ast: RuleAst, domain: StateDomain, milieu_count: int) -> RuleProgram:
    """
    Validate a tree against a state domain and milieu size.

    Args:
        ast: Parsed rule tree
        domain: State domain the rules will run in
        milieu_count: Number of neighbours every entity using these rules has

    Returns:
        RuleProgram wrapping the tree

    Raises:
        ValidationError: With variant BadIdentifier, TypeMismatch, NoEmit or MilieuIndexOutOfRange
    """
    _Checker(domain, milieu_count).block(ast.statements, ("statements",), {})
    if not always_emits(ast.statements):
        raise ValidationError(ValidationIssue.NO_EMIT, "an emit is not reached on every path")
    return RuleProgram(ast, domain, milieu_count, node_count(ast))


def collect_sites(program: RuleProgram) -> ProgramSites:
    """Typed expression sites and statement positions of a validated program"""
    checker = _Checker(program.domain, program.milieu_count, record=True)
    checker.block(program.ast.statements, ("statements",), {})
    return checker.sites
