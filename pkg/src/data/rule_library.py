"""
Rule Library Module

Generates rule sources for well-known cellular automata so configurations do not
have to hand-write them:

- elementary_rule_source(number): any of the 256 elementary CA rules, for a ring of
  radius 1 without self (milieu [ 0 ] is the left neighbour, milieu [ 1 ] the right)
- life_like_rule_source("B3/S23"): any outer-totalistic rule on a Moore grid

Sources are built as syntax trees and rendered canonically.
"""
import logging
import re
from typing import FrozenSet, List, Optional, Tuple

from ..errors import UsageError
from ..metamodel.states import StateDomain
from ..rule_language import RuleSource, render
from ..rule_language.nodes import (
    Binary, BoolLit, Emit, Expr, If, IntLit, MilieuIndex, MilieuSum, RuleAst, StateRef, Stmt, Unary
)

logger = logging.getLogger(__name__)

IDENTITY_SOURCE = RuleSource("emit entityState ;", name="identity")

_LIFE_RULE = re.compile(r"B([0-8]*)/S([0-8]*)", re.IGNORECASE)


def _state_literal(domain: StateDomain, on: bool) -> Expr:
    if domain.is_boolean:
        return BoolLit(on)
    return IntLit(1 if on else 0)


def _is_on(domain: StateDomain, e: Expr, on: bool) -> Expr:
    """Condition `e` is on (or off)"""
    if domain.is_boolean:
        return e if on else Unary("not", e)
    return Binary("==", e, IntLit(1 if on else 0))


def _conjunction(terms: List[Expr]) -> Expr:
    out = terms[0]
    for term in terms[1:]:
        out = Binary("and", out, term)
    return out


def _disjunction(terms: List[Expr]) -> Expr:
    out = terms[0]
    for term in terms[1:]:
        out = Binary("or", out, term)
    return out


def _check_binary_domain(domain: StateDomain) -> None:
    if not domain.is_boolean and not (domain.contains(0) and domain.contains(1)):
        raise UsageError(f"two-state rules need a domain holding 0 and 1, got {domain}")


def elementary_rule_source(number: int, domain: Optional[StateDomain] = None) -> RuleSource:
    """
    Rule source for an elementary cellular automaton.

    Neighbourhood (left, centre, right) maps to bit 4*left + 2*centre + right of
    the rule number. The minority output gets one `if` per neighbourhood; the
    majority output is the final emit.

    Args:
        number: Rule number 0..255
        domain: BooleanDomain or an integer range holding 0 and 1 (default int 0 1)

    Returns:
        Canonical rule source named "rule<number>"
    """
    if not 0 <= number <= 255:
        raise UsageError(f"elementary rule number must be in 0..255, got {number}")
    domain = domain or StateDomain.integer_range(0, 1)
    _check_binary_domain(domain)

    ones = [p for p in range(8) if (number >> p) & 1]
    minority_on = len(ones) <= 4
    patterns = ones if minority_on else [p for p in range(8) if not (number >> p) & 1]

    statements: List[Stmt] = []
    for p in sorted(patterns, reverse=True):
        left, centre, right = bool(p & 4), bool(p & 2), bool(p & 1)
        cond = _conjunction([
            _is_on(domain, MilieuIndex(IntLit(0)), left),
            _is_on(domain, StateRef(), centre),
            _is_on(domain, MilieuIndex(IntLit(1)), right),
        ])
        statements.append(If(cond, (Emit(_state_literal(domain, minority_on)),)))
    statements.append(Emit(_state_literal(domain, not minority_on)))

    source = render(RuleAst(tuple(statements)))
    return RuleSource(source.text, name=f"rule{number}")


def parse_life_rule(rulestring: str) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """
    Parse a B/S rulestring such as "B3/S23".

    Returns:
        (birth counts, survival counts)
    """
    match = _LIFE_RULE.fullmatch(rulestring.strip())
    if not match:
        raise UsageError(f"expected a rulestring like B3/S23, got {rulestring!r}")
    return frozenset(int(c) for c in match.group(1)), frozenset(int(c) for c in match.group(2))


def _count_condition(counts: FrozenSet[int]) -> Expr:
    return _disjunction([Binary("==", MilieuSum(), IntLit(c)) for c in sorted(counts)])


def life_like_rule_source(rulestring: str = "B3/S23", domain: Optional[StateDomain] = None) -> RuleSource:
    """
    Rule source for an outer-totalistic two-state rule on a Moore neighbourhood.

    Args:
        rulestring: Birth/survival counts, e.g. "B3/S23" for Conway's Game of Life
        domain: BooleanDomain or an integer range holding 0 and 1 (default int 0 1)
    """
    birth, survival = parse_life_rule(rulestring)
    domain = domain or StateDomain.integer_range(0, 1)
    _check_binary_domain(domain)

    on, off = _state_literal(domain, True), _state_literal(domain, False)
    alive: List[Stmt] = []
    if survival:
        alive.append(If(_count_condition(survival), (Emit(on),)))
    alive.append(Emit(off))

    statements: List[Stmt] = [If(_is_on(domain, StateRef(), True), tuple(alive))]
    if birth:
        statements.append(If(_count_condition(birth), (Emit(on),)))
    statements.append(Emit(off))

    source = render(RuleAst(tuple(statements)))
    name = "life" if (birth, survival) == ({3}, {2, 3}) else rulestring.replace("/", "_").lower()
    logger.debug(f"Generated {rulestring} rules ({len(source.text.splitlines())} lines)")
    return RuleSource(source.text, name=name)
