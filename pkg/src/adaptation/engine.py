"""
Adaptation Engine - controlled self-modification of update rules.

adapt() replaces exactly one rule source of a metastable system with a mutated
version and appends a lineage entry; nothing else in the system changes. Mutations
are type-guided: every generated token comes from the rule vocabulary, from the
domain's literal pool or from a freshly issued identifier<N> name, and every
candidate must pass the validator before it is installed.
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..codedata import BindingSet, execute_bound
from ..errors import (
    AdaptationFailed, LanguageError, NoApplicableOperator, RegimeError, RuleRuntimeError, UsageError
)
from ..metamodel.lineage import LineageEntry, MutationDescriptor, source_hash
from ..metamodel.states import StateDomain, StateValue
from ..metamodel.system import ActualSystem, MetastableSystem
from ..rule_language import RuleProgram, RuleSource, compile_source, render, tokenize
from ..rule_language.nodes import (
    Binary, BoolLit, Expr, Ident, If, IntLit, Let, MilieuCount, MilieuIndex, MilieuSum,
    Path, RuleAst, StateRef, Stmt, Unary, get_at, iter_nodes, replace_at
)
from ..rule_language.parser import parse_expression_text, parse_statements_text
from ..rule_language.renderer import render_expression, render_statements
from ..rule_language.validator import (
    ARITHMETIC_OPS, EQUALITY_OPS, LOGICAL_OPS, ORDERING_OPS, ExpressionSite, ExprType,
    ProgramSites, StatementSite, collect_sites, domain_type, validate
)
from ..rule_language.vocabulary import IDENTIFIER_PREFIX, TokenClass

logger = logging.getLogger(__name__)

# chance of stopping at an atom before max_depth is reached
ATOM_PROBABILITY = 0.3
PROBE_LIMIT = 4096


class MutationOperator(str, Enum):
    SUBSTITUTE_LITERAL = "SubstituteLiteral"
    SUBSTITUTE_OPERATOR = "SubstituteOperator"
    SUBSTITUTE_REFERENCE = "SubstituteReference"
    INSERT_LET = "InsertLet"
    DELETE_UNUSED_LET = "DeleteUnusedLet"
    WRAP_IN_IF = "WrapInIf"
    UNWRAP_IF = "UnwrapIf"


DEFAULT_WEIGHTS: Dict[MutationOperator, float] = {op: 1.0 for op in MutationOperator}


# ==== Identifiers ====

@dataclass
class IdentifierCounter:
    """Monotone source of identifier<N> names"""

    next: int = 0

    @classmethod
    def above(cls, sources: Sequence[RuleSource]) -> "IdentifierCounter":
        """Counter starting past every identifier<N> already present in sources"""
        highest = -1
        for source in sources:
            for tok in tokenize(source):
                if tok.cls is TokenClass.GENERATED_IDENT:
                    highest = max(highest, int(tok.text[len(IDENTIFIER_PREFIX):]))
        return cls(highest + 1)


def generate_identifier(counter: IdentifierCounter) -> str:
    """Issue identifier<next> and advance the counter"""
    name = f"{IDENTIFIER_PREFIX}{counter.next}"
    counter.next += 1
    return name


# ==== Randomness ====

class TrackedRng:
    """Seeded numpy generator that counts the draws it hands out"""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._generator = np.random.default_rng(self.seed)
        self.draws = 0

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)"""
        self.draws += 1
        return int(self._generator.integers(0, n))

    def choice(self, items: Sequence):
        return items[self.below(len(items))]

    def weighted(self, items: Sequence, weights: Sequence[float]):
        self.draws += 1
        p = np.asarray(weights, dtype=float)
        return items[int(self._generator.choice(len(items), p=p / p.sum()))]

    def chance(self, probability: float) -> bool:
        self.draws += 1
        return bool(self._generator.random() < probability)


# ==== Policy and operator pool ====

@dataclass(frozen=True)
class MutationPolicy:
    """
    How adapt() draws mutations.

    Args:
        weights: Relative weight per mutation operator
        max_retries: Consecutive invalid candidates tolerated before AdaptationFailed
        max_depth: Depth bound for generated expressions
        namer: Replaces generate_identifier when naming new lets
    """

    weights: Mapping[MutationOperator, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    max_retries: int = 16
    max_depth: int = 3
    namer: Optional[Callable[[IdentifierCounter], str]] = None

    def __post_init__(self):
        weights = {MutationOperator(k): float(v) for k, v in self.weights.items()}
        if any(w < 0 for w in weights.values()):
            raise UsageError("mutation weights must be non-negative")
        if not any(w > 0 for w in weights.values()):
            raise UsageError("at least one mutation weight must be positive")
        if self.max_retries < 1:
            raise UsageError(f"max_retries must be >= 1, got {self.max_retries}")
        if self.max_depth < 0:
            raise UsageError(f"max_depth must be >= 0, got {self.max_depth}")
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def only(cls, operator: MutationOperator, **kwargs) -> "MutationPolicy":
        return cls(weights={operator: 1.0}, **kwargs)

    def draw_operator(self, rng: TrackedRng) -> MutationOperator:
        operators = [op for op in MutationOperator if self.weights.get(op, 0.0) > 0]
        return rng.weighted(operators, [self.weights[op] for op in operators])

    def name(self, counter: IdentifierCounter) -> str:
        return (self.namer or generate_identifier)(counter)


@dataclass(frozen=True)
class OperatorPool:
    arithmetic: frozenset
    ordering: frozenset
    equality: frozenset
    logical: frozenset
    unary: frozenset

    @property
    def all(self) -> frozenset:
        return self.arithmetic | self.ordering | self.equality | self.logical | self.unary


def operator_pool(domain: StateDomain) -> OperatorPool:
    """Operators mutation may generate for a state domain"""
    if domain.is_boolean:
        return OperatorPool(frozenset(), frozenset(), EQUALITY_OPS, LOGICAL_OPS, frozenset({"not"}))
    return OperatorPool(ARITHMETIC_OPS, ORDERING_OPS, EQUALITY_OPS, LOGICAL_OPS, frozenset({"not", "-"}))


# ==== Mutation ====

def _int_literal(value: int) -> Expr:
    return IntLit(value) if value >= 0 else Unary("-", IntLit(-value))


def _is_divisor(ast: RuleAst, path: Path) -> bool:
    if not path or path[-1] != "right":
        return False
    owner = get_at(ast, path[:-1])
    return isinstance(owner, Binary) and owner.op in ("/", "%")


def _uses(statements: Sequence[Stmt], name: str) -> int:
    return sum(
        1 for _, node in iter_nodes(tuple(statements))
        if isinstance(node, Ident) and node.name == name
    )


class _Mutation:
    """One mutate() call: the parent, its sites and the draws made so far"""

    def __init__(self, parent: RuleProgram, policy: MutationPolicy, rng: TrackedRng, counter: IdentifierCounter):
        self.parent = parent
        self.ast = parent.ast
        self.policy = policy
        self.rng = rng
        self.counter = counter
        self.domain = parent.domain
        self.state_type = domain_type(parent.domain)
        self.milieu_count = parent.milieu_count
        self.pool = operator_pool(parent.domain)
        self.sites: ProgramSites = collect_sites(parent)
        self.site_at: Dict[Path, ExpressionSite] = {s.path: s for s in self.sites.expressions}

        ints = set(range(0, self.milieu_count + 1))
        if not self.domain.is_boolean:
            ints |= set(range(self.domain.lo, self.domain.hi + 1))
        self.int_pool: List[int] = sorted(ints)

    # ---- expression generation ----

    def literal(self, want: ExprType, positive: bool = False) -> Expr:
        if want is ExprType.BOOL:
            return BoolLit(self.rng.chance(0.5))
        pool = [v for v in self.int_pool if v > 0] if positive else self.int_pool
        return _int_literal(self.rng.choice(pool or [1]))

    def atom(self, want: ExprType, scope: Sequence[Tuple[str, ExprType]]) -> Expr:
        kinds = ["literal"]
        if want is ExprType.INT:
            kinds += ["milieuSum", "milieuCount"]
        if want is self.state_type:
            kinds.append("state")
            if self.milieu_count > 0:
                kinds.append("milieu")
        names = [n for n, t in scope if t is want]
        if names:
            kinds.append("ident")

        kind = self.rng.choice(kinds)
        if kind == "literal":
            return self.literal(want)
        if kind == "milieuSum":
            return MilieuSum()
        if kind == "milieuCount":
            return MilieuCount()
        if kind == "state":
            return StateRef()
        if kind == "milieu":
            return MilieuIndex(IntLit(self.rng.below(self.milieu_count)))
        return Ident(self.rng.choice(names))

    def composites(self, want: ExprType) -> List[Tuple[str, Tuple[ExprType, ...]]]:
        """(operator, operand types) pairs producing `want`"""
        pool = self.pool
        if want is ExprType.INT:
            out = [(op, (ExprType.INT, ExprType.INT)) for op in sorted(pool.arithmetic)]
            if "-" in pool.unary:
                out.append(("neg", (ExprType.INT,)))
            return out
        out = [(op, (ExprType.BOOL, ExprType.BOOL)) for op in sorted(pool.logical)]
        if "not" in pool.unary:
            out.append(("not", (ExprType.BOOL,)))
        operand = ExprType.BOOL if self.domain.is_boolean else ExprType.INT
        out += [(op, (operand, operand)) for op in sorted(pool.equality)]
        out += [(op, (ExprType.INT, ExprType.INT)) for op in sorted(pool.ordering)]
        return out

    def expression(self, want: ExprType, depth: int, scope: Sequence[Tuple[str, ExprType]]) -> Expr:
        options = self.composites(want)
        if depth <= 0 or not options or self.rng.chance(ATOM_PROBABILITY):
            return self.atom(want, scope)
        op, operands = self.rng.choice(options)
        if op == "neg":
            return Unary("-", self.expression(ExprType.INT, depth - 1, scope))
        if op == "not":
            return Unary("not", self.expression(ExprType.BOOL, depth - 1, scope))
        left = self.expression(operands[0], depth - 1, scope)
        if op in ("/", "%"):
            right = self.literal(ExprType.INT, positive=True)
        else:
            right = self.expression(operands[1], depth - 1, scope)
        return Binary(op, left, right)

    # ---- descriptors ----

    def replace_expression(self, operator: MutationOperator, site: ExpressionSite, new: Expr):
        candidate = replace_at(self.ast, site.path, new)
        descriptor = MutationDescriptor(
            operator=operator.value,
            site="expression",
            path=site.path,
            before=render_expression(site.node),
            after=render_expression(new),
        )
        return candidate, descriptor

    def splice(self, operator: MutationOperator, site: StatementSite, span: int, new: Tuple[Stmt, ...]):
        block = get_at(self.ast, site.block_path)
        replaced = block[site.index:site.index + span]
        new_block = block[:site.index] + new + block[site.index + span:]
        candidate = replace_at(self.ast, site.block_path, new_block)
        descriptor = MutationDescriptor(
            operator=operator.value,
            site="statements",
            path=site.block_path,
            before=render_statements(replaced),
            after=render_statements(new),
            index=site.index,
            span=span,
        )
        return candidate, descriptor

    def statement_at(self, site: StatementSite) -> Stmt:
        return get_at(self.ast, site.block_path)[site.index]

    # ---- operators ----

    def substitute_literal(self):
        choices = []
        for site in self.sites.expressions:
            if isinstance(site.node, BoolLit):
                choices.append((site, [BoolLit(not site.node.value)]))
            elif isinstance(site.node, IntLit):
                if site.in_index:
                    pool = list(range(self.milieu_count))
                elif _is_divisor(self.ast, site.path):
                    pool = [v for v in self.int_pool if v > 0]
                else:
                    pool = self.int_pool
                values = [_int_literal(v) for v in pool if v != site.node.value]
                if values:
                    choices.append((site, values))
        if not choices:
            raise NoApplicableOperator("no literal with an alternative value")
        site, values = self.rng.choice(choices)
        return self.replace_expression(MutationOperator.SUBSTITUTE_LITERAL, site, self.rng.choice(values))

    def _operator_alternatives(self, site: ExpressionSite) -> List[str]:
        node = site.node
        if node.op in ARITHMETIC_OPS:
            alternatives = set(self.pool.arithmetic)
            divisor_ok = isinstance(node.right, IntLit) and node.right.value != 0
            if not divisor_ok:
                alternatives -= {"/", "%"}
        elif node.op in LOGICAL_OPS:
            alternatives = set(self.pool.logical)
        else:
            left = self.site_at[site.path + ("left",)].type
            alternatives = set(self.pool.equality)
            if left is ExprType.INT:
                alternatives |= self.pool.ordering
        return sorted(alternatives - {node.op})

    def substitute_operator(self):
        choices = []
        for site in self.sites.expressions:
            if isinstance(site.node, Binary):
                alternatives = self._operator_alternatives(site)
                if alternatives:
                    choices.append((site, alternatives))
        if not choices:
            raise NoApplicableOperator("no operator with a same-signature alternative")
        site, alternatives = self.rng.choice(choices)
        new = replace(site.node, op=self.rng.choice(alternatives))
        return self.replace_expression(MutationOperator.SUBSTITUTE_OPERATOR, site, new)

    def _reference_alternatives(self, site: ExpressionSite) -> List[Expr]:
        want = site.type
        options: List[Expr] = []
        if want is self.state_type:
            options.append(StateRef())
            options.extend(MilieuIndex(IntLit(k)) for k in range(self.milieu_count))
        if want is ExprType.INT:
            options += [MilieuSum(), MilieuCount()]
        options.extend(Ident(name) for name, t in site.scope if t is want)
        return [o for o in options if o != site.node]

    def substitute_reference(self):
        choices = []
        for site in self.sites.expressions:
            if not isinstance(site.node, (StateRef, MilieuIndex, MilieuSum, MilieuCount, Ident)):
                continue
            # index and divisor positions keep their operands
            if site.in_index or _is_divisor(self.ast, site.path):
                continue
            alternatives = self._reference_alternatives(site)
            if alternatives:
                choices.append((site, alternatives))
        if not choices:
            raise NoApplicableOperator("no reference with a same-type alternative")
        site, alternatives = self.rng.choice(choices)
        return self.replace_expression(MutationOperator.SUBSTITUTE_REFERENCE, site, self.rng.choice(alternatives))

    def insert_let(self):
        site = self.rng.choice(self.sites.statements)
        want = ExprType.BOOL if self.domain.is_boolean else self.rng.choice([ExprType.INT, ExprType.BOOL])
        name = self.policy.name(self.counter)
        expr = self.expression(want, self.policy.max_depth, site.scope)
        return self.splice(MutationOperator.INSERT_LET, site, 0, (Let(name, expr),))

    def delete_unused_let(self):
        choices = []
        for site in self.sites.statements:
            stmt = self.statement_at(site)
            if not isinstance(stmt, Let) or site.block_length < 2:
                continue
            rest = get_at(self.ast, site.block_path)[site.index + 1:]
            if _uses(rest, stmt.name) == 0:
                choices.append(site)
        if not choices:
            raise NoApplicableOperator("no unused let")
        return self.splice(MutationOperator.DELETE_UNUSED_LET, self.rng.choice(choices), 1, ())

    def wrap_in_if(self):
        choices = [s for s in self.sites.statements if not isinstance(self.statement_at(s), Let)]
        if not choices:
            raise NoApplicableOperator("no statement to wrap")
        site = self.rng.choice(choices)
        stmt = self.statement_at(site)
        cond = self.expression(ExprType.BOOL, self.policy.max_depth, site.scope)
        # a wrapped final statement keeps an else so the block still always emits
        wrapped = If(cond, (stmt,), (stmt,) if site.is_final else None)
        return self.splice(MutationOperator.WRAP_IN_IF, site, 1, (wrapped,))

    def unwrap_if(self):
        choices = [s for s in self.sites.statements if isinstance(self.statement_at(s), If)]
        if not choices:
            raise NoApplicableOperator("no if statement")
        site = self.rng.choice(choices)
        stmt = self.statement_at(site)
        branches = [stmt.then] if stmt.orelse is None else [stmt.then, stmt.orelse]
        return self.splice(MutationOperator.UNWRAP_IF, site, 1, tuple(self.rng.choice(branches)))


_HANDLERS = {
    MutationOperator.SUBSTITUTE_LITERAL: _Mutation.substitute_literal,
    MutationOperator.SUBSTITUTE_OPERATOR: _Mutation.substitute_operator,
    MutationOperator.SUBSTITUTE_REFERENCE: _Mutation.substitute_reference,
    MutationOperator.INSERT_LET: _Mutation.insert_let,
    MutationOperator.DELETE_UNUSED_LET: _Mutation.delete_unused_let,
    MutationOperator.WRAP_IN_IF: _Mutation.wrap_in_if,
    MutationOperator.UNWRAP_IF: _Mutation.unwrap_if,
}


def mutate(
    parent: RuleProgram,
    policy: MutationPolicy,
    rng: TrackedRng,
    counter: IdentifierCounter
) -> Tuple[RuleAst, MutationDescriptor]:
    """
    Apply one randomly drawn mutation operator to a validated program.

    The candidate is not validated here.

    Returns:
        (candidate tree, descriptor of the change)

    Raises:
        NoApplicableOperator: The drawn operator has no site in the parent
    """
    start = rng.draws
    operator = policy.draw_operator(rng)
    candidate, descriptor = _HANDLERS[operator](_Mutation(parent, policy, rng, counter))
    return candidate, replace(descriptor, draws=rng.draws - start)


def replay(parent: RuleAst, descriptor: MutationDescriptor) -> RuleAst:
    """
    Re-apply a recorded mutation to its parent tree.

    Raises:
        UsageError: If the parent does not contain the descriptor's `before` fragment
        LanguageError: If the `after` fragment does not parse
    """
    if descriptor.site == "expression":
        current = get_at(parent, descriptor.path)
        if render_expression(current) != descriptor.before:
            raise UsageError(f"expected {descriptor.before!r} at {list(descriptor.path)}, "
                             f"found {render_expression(current)!r}")
        return replace_at(parent, descriptor.path, parse_expression_text(descriptor.after))

    if descriptor.site == "statements":
        block = get_at(parent, descriptor.path)
        end = descriptor.index + descriptor.span
        if render_statements(block[descriptor.index:end]) != descriptor.before:
            raise UsageError(f"expected {descriptor.before!r} in block {list(descriptor.path)}")
        new = parse_statements_text(descriptor.after) if descriptor.after else ()
        return replace_at(parent, descriptor.path, block[:descriptor.index] + new + block[end:])

    raise UsageError(f"unknown descriptor site {descriptor.site!r}")


# ==== Runtime probe ====

Probe = Callable[[RuleProgram, int], None]


def closure_probe(
    system: MetastableSystem,
    states: Optional[Sequence[StateValue]] = None,
    limit: int = PROBE_LIMIT
) -> Probe:
    """
    Screen candidates by running them before they are installed.

    The candidate runs against every entity of its slot on `states` and, when the
    domain is small enough (size ** (milieuCount + 1) <= limit), against every
    possible binding. Any RuleRuntimeError rejects the candidate.
    """
    milieus = system.milieus()
    values = list(system.state_domain.values())

    def probe(program: RuleProgram, slot: int) -> None:
        bindings: List[BindingSet] = []
        if states is not None:
            bindings.extend(
                BindingSet.from_snapshot(states, i, milieus[i].neighbors)
                for i in system.slot_members(slot)
            )
        width = program.milieu_count + 1
        if len(values) ** width <= limit:
            bindings.extend(
                BindingSet(combo[0], tuple(combo[1:]))
                for combo in itertools.product(values, repeat=width)
            )
        for b in bindings:
            execute_bound(program, b)

    return probe


# ==== Adaptation ====

def adapt(
    system: MetastableSystem,
    policy: MutationPolicy,
    rng: TrackedRng,
    counter: IdentifierCounter,
    probe: Optional[Probe] = None,
    iteration: Optional[int] = None
) -> MetastableSystem:
    """
    Replace one rule source by a validated mutation of itself.

    Args:
        system: System in the metastable regime
        policy: Operator weights, retry and depth bounds
        rng: Seeded generator; its seed is recorded in the lineage
        counter: Identifier counter, advanced by every InsertLet
        probe: Optional runtime screen for candidates
        iteration: Iteration after which the new rules take effect (lineage bookkeeping)

    Returns:
        The system with one rule source replaced and one lineage entry appended

    Raises:
        RegimeError: For anything but a metastable system
        AdaptationFailed: After policy.max_retries consecutive rejected candidates
    """
    if isinstance(system, ActualSystem):
        raise RegimeError("adapt needs a metastable system; deactualize the actual system first")
    if not isinstance(system, MetastableSystem):
        raise RegimeError(f"adapt needs a metastable system, got {type(system).__name__}")

    slot = 0 if system.shared else rng.below(system.entity_count)
    entity = None if system.shared else slot
    parent_source = system.rule_sources[slot]
    parent = compile_source(parent_source, system.state_domain, system.milieu_count(slot))

    last_reason = "no candidate drawn"
    for attempt in range(1, policy.max_retries + 1):
        try:
            candidate, descriptor = mutate(parent, policy, rng, counter)
            validate(candidate, parent.domain, parent.milieu_count)
            child_source = render(candidate)
            # the installed text must pass the front end on its own
            program = compile_source(child_source, parent.domain, parent.milieu_count)
            if probe is not None:
                probe(program, slot)
        except (NoApplicableOperator, LanguageError, RuleRuntimeError) as e:
            last_reason = str(e)
            logger.debug(f"Rejected candidate {attempt}/{policy.max_retries}: {last_reason}")
            continue

        descriptor = replace(descriptor, entity=entity)
        entry = LineageEntry(
            generation=system.lineage.next_generation,
            parent_hash=source_hash(parent_source),
            child_hash=source_hash(child_source),
            operator=descriptor.operator,
            entity=entity,
            seed=rng.seed,
            descriptor=descriptor,
            iteration=iteration,
        )
        sources = list(system.rule_sources)
        sources[slot] = RuleSource(child_source.text, name=parent_source.name)
        logger.info(f"Adapted rules: {entry.record()}")
        return replace(system, rule_sources=tuple(sources), lineage=system.lineage.append(entry))

    raise AdaptationFailed(policy.max_retries, last_reason)
