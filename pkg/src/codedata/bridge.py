"""
Code <-> data transitions.

code -> data: interpolate() closes a rule source over the running system's state by
substituting literal tokens for entityState, milieu [ k ], milieuSum and milieuCount.
Substitution is token-level; a raw substring replace would also rewrite longer
words that merely contain a reference name.

data -> code: execute_closed() compiles a closed source in memory and runs it;
execute_bound() runs a compiled program against bindings directly. Both capture
the emitted value as text and hand it to capture_parse(), which turns it back into
a StateValue of the running system.
"""
import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

from ..errors import (
    EmittedValueOutOfDomain, NonConstantMilieuIndexInFaithfulMode, RuleRuntimeError, RuntimeIssue,
    UnparsableCapture, UsageError
)
from ..metamodel.states import StateDomain, StateValue
from ..rule_language.lexer import RuleSource, Token, join_tokens, tokenize
from ..rule_language.nodes import MilieuCount, MilieuIndex, MilieuSum, StateRef, iter_nodes
from ..rule_language.parser import parse
from ..rule_language.validator import RuleProgram, validate
from ..rule_language.vocabulary import TokenClass
from .evaluator import CaptureChannel, Evaluator


_INTEGER_CAPTURE = re.compile(r"-?[0-9]+")


class ExecutionMode(str, Enum):
    FAITHFUL = "faithful"
    BOUND = "bound"


@dataclass(frozen=True)
class BindingSet:
    """Inputs of the update function for one entity at one iteration"""

    entity_state: StateValue
    milieu_states: Tuple[StateValue, ...]

    @classmethod
    def from_snapshot(cls, snapshot: Sequence[StateValue], index: int, neighbors: Sequence[int]) -> "BindingSet":
        return cls(snapshot[index], tuple(snapshot[j] for j in neighbors))

    @property
    def milieu_sum(self) -> int:
        return sum(v.as_int() for v in self.milieu_states)

    @property
    def milieu_count(self) -> int:
        return len(self.milieu_states)


def _literal_tokens(value, like: Token) -> List[Token]:
    """Tokens spelling a literal; negatives are parenthesised so they stay one operand"""
    if isinstance(value, bool):
        return [Token(TokenClass.BOOL_LITERAL, "true" if value else "false", like.line, like.column)]
    if value < 0:
        return [
            Token(TokenClass.OPERATOR, "(", like.line, like.column),
            Token(TokenClass.OPERATOR, "-", like.line, like.column),
            Token(TokenClass.INT_LITERAL, str(-value), like.line, like.column),
            Token(TokenClass.OPERATOR, ")", like.line, like.column),
        ]
    return [Token(TokenClass.INT_LITERAL, str(value), like.line, like.column)]


def _constant_index_span(tokens: Sequence[Token], start: int) -> Tuple[int, int]:
    """
    For tokens[start] == 'milieu', locate its bracketed index.

    Returns:
        (index value, position after the closing bracket)
    """
    head = tokens[start]
    if start + 1 >= len(tokens) or tokens[start + 1].text != "[":
        raise NonConstantMilieuIndexInFaithfulMode(head.line, head.column)
    depth, j = 0, start + 1
    while j < len(tokens):
        if tokens[j].text == "[" and tokens[j].cls is TokenClass.OPERATOR:
            depth += 1
        elif tokens[j].text == "]" and tokens[j].cls is TokenClass.OPERATOR:
            depth -= 1
            if depth == 0:
                break
        j += 1
    else:
        raise NonConstantMilieuIndexInFaithfulMode(head.line, head.column)

    inner = [t for t in tokens[start + 2:j] if t.text not in ("(", ")")]
    if len(inner) == 1 and inner[0].cls is TokenClass.INT_LITERAL:
        return int(inner[0].text), j + 1
    if len(inner) == 2 and inner[0].text == "-" and inner[1].cls is TokenClass.INT_LITERAL:
        return -int(inner[1].text), j + 1
    raise NonConstantMilieuIndexInFaithfulMode(head.line, head.column)


def interpolate(source: RuleSource, bindings: BindingSet) -> RuleSource:
    """
    Close a rule source over the given bindings (code -> data).

    Args:
        source: Rule text referencing entityState / milieu
        bindings: Current entity and milieu states

    Returns:
        Rule text without free references, tokens joined by single spaces

    Raises:
        NonConstantMilieuIndexInFaithfulMode: For milieu [ expr ] with a computed index
        LanguageError: When the source does not tokenize
    """
    tokens = tokenize(source)
    out: List[Token] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.cls is TokenClass.STATE_REF:
            out.extend(_literal_tokens(bindings.entity_state.value, tok))
            i += 1
        elif tok.cls is TokenClass.MILIEU_REF and tok.text == "milieuSum":
            out.extend(_literal_tokens(bindings.milieu_sum, tok))
            i += 1
        elif tok.cls is TokenClass.MILIEU_REF and tok.text == "milieuCount":
            out.extend(_literal_tokens(bindings.milieu_count, tok))
            i += 1
        elif tok.cls is TokenClass.MILIEU_REF:
            k, i = _constant_index_span(tokens, i)
            if k < 0:
                raise RuleRuntimeError(f"milieu [ {k} ] at {tok.line}:{tok.column}",
                                       RuntimeIssue.NEGATIVE_MILIEU_INDEX)
            if k >= bindings.milieu_count:
                raise RuleRuntimeError(
                    f"milieu [ {k} ] with milieuCount {bindings.milieu_count} at {tok.line}:{tok.column}",
                    RuntimeIssue.MILIEU_INDEX_OUT_OF_RANGE
                )
            out.extend(_literal_tokens(bindings.milieu_states[k].value, tok))
        else:
            out.append(tok)
            i += 1
    return RuleSource(join_tokens(out), name=source.name)


def capture_parse(raw: str, domain: StateDomain) -> StateValue:
    """
    Parse a captured raw value back into a state (data -> code).

    Raises:
        UnparsableCapture: If raw is not a value of the domain's kind
        EmittedValueOutOfDomain: If the value lies outside the domain
    """
    if domain.is_boolean:
        if raw == "true":
            return StateValue(domain.kind, True)
        if raw == "false":
            return StateValue(domain.kind, False)
        raise UnparsableCapture(raw, str(domain))

    if not _INTEGER_CAPTURE.fullmatch(raw):
        raise UnparsableCapture(raw, str(domain))
    value = int(raw)
    if not domain.contains(value):
        raise EmittedValueOutOfDomain(raw, str(domain))
    return StateValue(domain.kind, value)


def execute_closed(closed: RuleSource, domain: StateDomain) -> StateValue:
    """
    Compile a closed rule source in memory, run it and capture its emission.

    Raises:
        UsageError: If the source still references entity or milieu state
        LanguageError: Front-end failures
        RuleRuntimeError: DivisionByZero, NoEmitExecuted, EmittedValueOutOfDomain, ...
    """
    ast = parse(tokenize(closed))
    for _, node in iter_nodes(ast):
        if isinstance(node, (StateRef, MilieuIndex, MilieuSum, MilieuCount)):
            raise UsageError("execute_closed needs an interpolated source without state references")
    program = validate(ast, domain, 0)
    channel = CaptureChannel()
    Evaluator(program).run(channel)
    return capture_parse(channel.captured(), domain)


def execute_bound(program: RuleProgram, bindings: BindingSet) -> StateValue:
    """
    Run a compiled program directly against bindings.

    Computed milieu indices are allowed and checked against the milieu at runtime.

    Raises:
        RuleRuntimeError: DivisionByZero, NegativeMilieuIndex, MilieuIndexOutOfRange,
            NoEmitExecuted, EmittedValueOutOfDomain, ...
    """
    channel = CaptureChannel()
    Evaluator(
        program,
        bindings.entity_state.value,
        [v.value for v in bindings.milieu_states]
    ).run(channel)
    return capture_parse(channel.captured(), program.domain)


def execute(
    mode: ExecutionMode,
    source: RuleSource,
    program: RuleProgram,
    bindings: BindingSet
) -> StateValue:
    """Run one entity's rules in the given mode"""
    if mode is ExecutionMode.FAITHFUL:
        return execute_closed(interpolate(source, bindings), program.domain)
    return execute_bound(program, bindings)
