"""
Tree-walking evaluator for validated rule programs.

The evaluator only sees its bindings and its capture channel. The first executed
emit writes the value's text form to the channel and ends evaluation. A node-visit
budget of FUEL_FACTOR x node count is enforced on top of the loop-free grammar.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

from ..errors import NoEmitExecuted, RuleRuntimeError, RuntimeIssue, UsageError
from ..rule_language.nodes import (
    Binary, BoolLit, Emit, Expr, Ident, If, IntLit, Let, MilieuCount, MilieuIndex,
    MilieuSum, StateRef, Stmt, Unary
)
from ..rule_language.validator import RuleProgram

FUEL_FACTOR = 10

Value = Union[bool, int]


@dataclass
class CaptureChannel:
    """Private output stream of one execution"""

    buffer: List[str] = field(default_factory=list)

    def write(self, raw: str) -> None:
        self.buffer.append(raw)

    def captured(self) -> str:
        """The single captured value"""
        if not self.buffer:
            raise NoEmitExecuted()
        if len(self.buffer) > 1:
            raise UsageError(f"capture channel holds {len(self.buffer)} values")
        return self.buffer[0]


def format_raw(value: Value) -> str:
    """Wire form of an emitted value: true/false or a decimal integer"""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def truncating_divide(a: int, b: int) -> int:
    if b == 0:
        raise RuleRuntimeError(f"{a} / 0", RuntimeIssue.DIVISION_BY_ZERO)
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def truncating_modulo(a: int, b: int) -> int:
    """Remainder matching truncating_divide; takes the sign of a"""
    if b == 0:
        raise RuleRuntimeError(f"{a} % 0", RuntimeIssue.DIVISION_BY_ZERO)
    return a - b * truncating_divide(a, b)


class _Emitted(Exception):
    pass


class Evaluator:
    """
    Evaluates one program against one set of inputs.

    Args:
        program: Validated program
        entity_state: Value of entityState, or None for closed sources
        milieu_values: Values of milieu [ 0 ], milieu [ 1 ], ... or None for closed sources
    """

    def __init__(
        self,
        program: RuleProgram,
        entity_state: Optional[Value] = None,
        milieu_values: Optional[Sequence[Value]] = None
    ):
        self.program = program
        self.entity_state = entity_state
        self.milieu_values = milieu_values
        self.fuel = FUEL_FACTOR * program.node_count

    def run(self, channel: CaptureChannel) -> None:
        self.channel = channel
        try:
            self._block(self.program.ast.statements, {})
        except _Emitted:
            return
        raise NoEmitExecuted()

    def _burn(self) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise RuleRuntimeError("node-visit budget exhausted", RuntimeIssue.FUEL_EXHAUSTED)

    # ==== Statements ====

    def _block(self, statements: Sequence[Stmt], env: Dict[str, Value]) -> None:
        env = dict(env)
        for stmt in statements:
            self._burn()
            if isinstance(stmt, Let):
                env[stmt.name] = self._eval(stmt.expr, env)
            elif isinstance(stmt, If):
                if self._eval(stmt.cond, env):
                    self._block(stmt.then, env)
                elif stmt.orelse is not None:
                    self._block(stmt.orelse, env)
            elif isinstance(stmt, Emit):
                self.channel.write(format_raw(self._eval(stmt.expr, env)))
                raise _Emitted()

    # ==== Expressions ====

    def _eval(self, e: Expr, env: Dict[str, Value]) -> Value:
        self._burn()
        if isinstance(e, (IntLit, BoolLit)):
            return e.value
        if isinstance(e, Ident):
            return env[e.name]
        if isinstance(e, StateRef):
            return self._inputs()[0]
        if isinstance(e, MilieuSum):
            return sum(int(v) for v in self._inputs()[1])
        if isinstance(e, MilieuCount):
            return len(self._inputs()[1])
        if isinstance(e, MilieuIndex):
            return self._milieu(self._eval(e.index, env))
        if isinstance(e, Unary):
            operand = self._eval(e.operand, env)
            return (not operand) if e.op == "not" else -operand
        if isinstance(e, Binary):
            return self._binary(e, env)
        raise TypeError(f"not an expression node: {e!r}")

    def _inputs(self):
        if self.entity_state is None or self.milieu_values is None:
            raise UsageError("closed source still references entity or milieu state")
        return self.entity_state, self.milieu_values

    def _milieu(self, k: int) -> Value:
        values = self._inputs()[1]
        if k < 0:
            raise RuleRuntimeError(f"milieu [ {k} ]", RuntimeIssue.NEGATIVE_MILIEU_INDEX)
        if k >= len(values):
            raise RuleRuntimeError(f"milieu [ {k} ] with milieuCount {len(values)}",
                                   RuntimeIssue.MILIEU_INDEX_OUT_OF_RANGE)
        return values[k]

    def _binary(self, e: Binary, env: Dict[str, Value]) -> Value:
        op = e.op
        # short-circuit; the skipped operand is not visited
        if op == "and":
            return bool(self._eval(e.left, env)) and bool(self._eval(e.right, env))
        if op == "or":
            return bool(self._eval(e.left, env)) or bool(self._eval(e.right, env))

        a = self._eval(e.left, env)
        b = self._eval(e.right, env)
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return truncating_divide(a, b)
        if op == "%":
            return truncating_modulo(a, b)
        raise TypeError(f"unknown operator {op!r}")
