"""
Shared fixtures and hypothesis strategies for the curb test suite.
"""
from pathlib import Path
from typing import List, Sequence, Tuple

import pytest
from hypothesis import strategies as st

from src.codedata import BindingSet
from src.metamodel.states import StateDomain
from src.rule_language.nodes import (
    Binary, BoolLit, Emit, Expr, Ident, If, IntLit, Let, MilieuCount, MilieuIndex, MilieuSum,
    RuleAst, StateRef, Stmt, Unary
)
from src.rule_language.validator import ExprType, domain_type

REPO_ROOT = Path(__file__).parent
RULES_DIR = REPO_ROOT / "rules"

INT_OPS = ("+", "-", "*", "/", "%")
ORDER_OPS = ("<", "<=", ">", ">=")
EQ_OPS = ("==", "!=")
BOOL_OPS = ("and", "or")


# ==== Fixtures ====

@pytest.fixture
def binary_domain():
    return StateDomain.integer_range(0, 1)


@pytest.fixture
def bool_domain():
    return StateDomain.boolean()


@pytest.fixture
def rules_dir():
    return RULES_DIR


@pytest.fixture
def rule110_text():
    return (RULES_DIR / "rule110.curb").read_text(encoding='utf-8')


@pytest.fixture
def life_text():
    return (RULES_DIR / "life.curb").read_text(encoding='utf-8')


# ==== Strategies ====

Scope = Tuple[Tuple[str, ExprType], ...]


@st.composite
def typed_expressions(
    draw,
    want: ExprType,
    state_type: ExprType,
    milieu_count: int,
    scope: Scope = (),
    depth: int = 3
) -> Expr:
    """Well-typed expression of type `want`; milieu indices are constants in range"""
    if depth <= 0 or draw(st.integers(0, 9)) < 3:
        atoms = []
        if want is ExprType.INT:
            atoms += [st.builds(IntLit, st.integers(0, 6)), st.just(MilieuSum()), st.just(MilieuCount())]
        else:
            atoms.append(st.builds(BoolLit, st.booleans()))
        if want is state_type:
            atoms.append(st.just(StateRef()))
            if milieu_count > 0:
                atoms.append(st.integers(0, milieu_count - 1).map(lambda k: MilieuIndex(IntLit(k))))
        names = [name for name, t in scope if t is want]
        if names:
            atoms.append(st.sampled_from(names).map(Ident))
        return draw(st.one_of(atoms))

    def sub(t: ExprType):
        return typed_expressions(t, state_type, milieu_count, scope, depth - 1)

    if want is ExprType.INT:
        if draw(st.integers(0, 5)) == 0:
            return Unary("-", draw(sub(ExprType.INT)))
        return Binary(draw(st.sampled_from(INT_OPS)), draw(sub(ExprType.INT)), draw(sub(ExprType.INT)))

    kind = draw(st.sampled_from(("not", "logic", "eq", "order")))
    if kind == "not":
        return Unary("not", draw(sub(ExprType.BOOL)))
    if kind == "logic":
        return Binary(draw(st.sampled_from(BOOL_OPS)), draw(sub(ExprType.BOOL)), draw(sub(ExprType.BOOL)))
    if kind == "eq":
        operand = draw(st.sampled_from((ExprType.INT, ExprType.BOOL)))
        return Binary(draw(st.sampled_from(EQ_OPS)), draw(sub(operand)), draw(sub(operand)))
    return Binary(draw(st.sampled_from(ORDER_OPS)), draw(sub(ExprType.INT)), draw(sub(ExprType.INT)))


@st.composite
def rule_programs(draw, domain: StateDomain, milieu_count: int, max_lets: int = 2) -> RuleAst:
    """
    Valid rule tree: a few lets, an optional if, then a final emit.

    Emitted values are well-typed but may fall outside the domain at runtime.
    """
    state_type = domain_type(domain)
    scope: List[Tuple[str, ExprType]] = []
    statements: List[Stmt] = []

    for k in range(draw(st.integers(0, max_lets))):
        t = draw(st.sampled_from((ExprType.INT, ExprType.BOOL)))
        name = f"identifier{k}"
        statements.append(Let(name, draw(typed_expressions(t, state_type, milieu_count, tuple(scope)))))
        scope.append((name, t))

    frozen = tuple(scope)
    if draw(st.booleans()):
        cond = draw(typed_expressions(ExprType.BOOL, state_type, milieu_count, frozen))
        then = (Emit(draw(typed_expressions(state_type, state_type, milieu_count, frozen))),)
        orelse = None
        if draw(st.booleans()):
            orelse = (Emit(draw(typed_expressions(state_type, state_type, milieu_count, frozen))),)
        statements.append(If(cond, then, orelse))

    statements.append(Emit(draw(typed_expressions(state_type, state_type, milieu_count, frozen))))
    return RuleAst(tuple(statements))


@st.composite
def binding_sets(draw, domain: StateDomain, milieu_count: int) -> BindingSet:
    values = list(domain.values())
    state = draw(st.sampled_from(values))
    milieu = draw(st.lists(st.sampled_from(values), min_size=milieu_count, max_size=milieu_count))
    return BindingSet(state, tuple(milieu))


def states_of(domain: StateDomain, raws: Sequence) -> Tuple:
    return tuple(domain.value(r) for r in raws)
