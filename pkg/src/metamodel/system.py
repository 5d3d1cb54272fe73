"""
System Metamodel - regime pipeline and synchronous iteration.

A system moves Virtual -> Metastable -> Actual. The metastable system binds every
parameter but keeps its rule sources as plain text; actualize() compiles them and
instantiates the entities; step() applies the update function to every entity
against the snapshot of the previous iteration.
"""
import logging
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

from ..codedata import BindingSet, ExecutionMode, execute
from ..errors import CountMismatch, CurbError, DomainMismatch, RegimeError, UsageError
from ..rule_language import VOCABULARY, RuleProgram, RuleSource, Vocabulary, compile_source
from .lineage import RuleLineage
from .states import DomainKind, StateDomain, StateValue
from .topology import Milieu, TopologySpec, build_topology, shortest_milieu

logger = logging.getLogger(__name__)

DEFAULT_CONCEPTS = (
    "entities", "states", "milieus", "update function", "update rules", "adaptation function"
)


class Regime(str, Enum):
    VIRTUAL = "virtual"
    METASTABLE = "metastable"
    ACTUAL = "actual"


@dataclass(frozen=True)
class VirtualSystem:
    """Most abstract description: a state kind and a vocabulary, nothing bound"""

    domain_kind: DomainKind
    vocabulary: Vocabulary
    concepts: Tuple[str, ...] = DEFAULT_CONCEPTS

    @property
    def regime(self) -> Regime:
        return Regime.VIRTUAL


@dataclass(frozen=True)
class ConcretizationParams:
    entity_count: int
    state_domain: StateDomain
    topology: TopologySpec
    initial_states: Tuple[StateValue, ...]
    rule_sources: Tuple[RuleSource, ...]
    rng_seed: int
    shared: bool = True


@dataclass(frozen=True)
class MetastableSystem:
    """
    All parameters bound, rules stored verbatim.

    With shared=True there is exactly one rule source used by every entity; otherwise
    rule_sources[i] belongs to entity i.
    """

    virtual: VirtualSystem
    entity_count: int
    state_domain: StateDomain
    topology: TopologySpec
    initial_states: Tuple[StateValue, ...]
    rule_sources: Tuple[RuleSource, ...]
    rng_seed: int
    shared: bool = True
    lineage: RuleLineage = field(default_factory=RuleLineage)

    @property
    def regime(self) -> Regime:
        return Regime.METASTABLE

    def rule_slot(self, entity: int) -> int:
        return 0 if self.shared else entity

    def slot_members(self, slot: int) -> List[int]:
        if self.shared:
            return list(range(self.entity_count))
        return [slot]

    def milieus(self) -> List[Milieu]:
        return build_topology(self.topology, self.entity_count)

    def milieu_count(self, slot: int, milieus: Optional[Sequence[Milieu]] = None) -> int:
        """Milieu length a rule slot is validated against (shortest among its entities)"""
        if milieus is None:
            milieus = self.milieus()
        return shortest_milieu(milieus, self.slot_members(slot))


@dataclass(frozen=True)
class Entity:
    index: int
    state: StateValue
    milieu: Milieu
    rules: RuleSource
    rule_slot: int


@dataclass(frozen=True)
class ActualSystem:
    metastable: MetastableSystem
    entities: Tuple[Entity, ...]
    programs: Tuple[RuleProgram, ...]
    iteration: int = 0

    @property
    def regime(self) -> Regime:
        return Regime.ACTUAL

    def states(self) -> Tuple[StateValue, ...]:
        return tuple(e.state for e in self.entities)


@dataclass(frozen=True)
class Snapshot:
    """State vector of an actual system at one iteration"""

    iteration: int
    states: Tuple[StateValue, ...]

    @classmethod
    def of(cls, actual: ActualSystem) -> "Snapshot":
        return cls(actual.iteration, actual.states())


@dataclass(frozen=True)
class Trajectory:
    """State vectors for iterations start .. start + T"""

    iterations: Tuple[Tuple[StateValue, ...], ...]
    start: int = 0

    def __len__(self) -> int:
        return len(self.iterations)

    def __getitem__(self, t: int) -> Tuple[StateValue, ...]:
        return self.iterations[t]

    def extend(self, states: Tuple[StateValue, ...]) -> "Trajectory":
        return replace(self, iterations=self.iterations + (states,))


# ==== Regime transitions ====

def define_virtual(domain_kind: DomainKind, vocabulary: Vocabulary = VOCABULARY) -> VirtualSystem:
    """Create a system in the virtual regime"""
    if vocabulary != VOCABULARY:
        raise UsageError("a virtual system must use the rule-language vocabulary")
    return VirtualSystem(DomainKind(domain_kind), vocabulary)


def concretize(virtual: VirtualSystem, params: ConcretizationParams) -> MetastableSystem:
    """
    Bind the parameters of a virtual system.

    Rule sources are stored verbatim; they are compiled by actualize().

    Args:
        virtual: System in the virtual regime
        params: Entity count, domain, topology, initial states, rule sources and seed

    Returns:
        System in the metastable regime

    Raises:
        RegimeError: If virtual is not a VirtualSystem
        DomainMismatch: Domain kind differs from the declared one, or an initial state lies outside it
        CountMismatch: Wrong number of initial states or rule sources
        TopologyError: If the topology cannot be built for entity_count entities
    """
    if not isinstance(virtual, VirtualSystem):
        raise RegimeError(f"concretize needs a virtual system, got {type(virtual).__name__}")

    n = params.entity_count
    if n <= 0:
        raise CountMismatch(f"entityCount must be positive, got {n}")
    domain = params.state_domain
    if domain.kind is not virtual.domain_kind:
        raise DomainMismatch(f"state domain {domain} does not match declared kind {virtual.domain_kind.value}")

    states = tuple(params.initial_states)
    if len(states) != n:
        raise CountMismatch(f"{len(states)} initial states for {n} entities")
    for i, state in enumerate(states):
        if state.kind is not domain.kind or not domain.contains(state.value):
            raise DomainMismatch(f"initial state {state} of entity {i} outside {domain}")

    sources = tuple(params.rule_sources)
    if not sources:
        raise CountMismatch("at least one rule source is required")
    if params.shared and len(sources) != 1:
        raise CountMismatch(f"shared rules need exactly one source, got {len(sources)}")
    if not params.shared and len(sources) != n:
        raise CountMismatch(f"{len(sources)} rule sources for {n} entities")

    # materialize once so topology errors surface in this regime
    build_topology(params.topology, n)

    system = MetastableSystem(
        virtual=virtual,
        entity_count=n,
        state_domain=domain,
        topology=params.topology,
        initial_states=states,
        rule_sources=sources,
        rng_seed=params.rng_seed,
        shared=params.shared,
    )
    logger.info(f"Concretized {n} entities, {domain}, {params.topology.describe()}")
    return system


def actualize(metastable: MetastableSystem, resume: Optional[Snapshot] = None) -> ActualSystem:
    """
    Compile every rule source and instantiate the entities.

    Args:
        metastable: System in the metastable regime
        resume: Continue from this iteration and state vector instead of the initial states

    Returns:
        System in the actual regime

    Raises:
        RegimeError: If metastable is not a MetastableSystem
        LanguageError: Rule sources failing tokenize, parse or validate
        CountMismatch / DomainMismatch: If resume does not fit the system
    """
    if not isinstance(metastable, MetastableSystem):
        raise RegimeError(f"actualize needs a metastable system, got {type(metastable).__name__}")

    milieus = metastable.milieus()
    programs = []
    for slot, source in enumerate(metastable.rule_sources):
        try:
            programs.append(compile_source(
                source, metastable.state_domain, metastable.milieu_count(slot, milieus)
            ))
        except CurbError as e:
            raise e.annotate(entity=None if metastable.shared else slot)

    if resume is None:
        states, iteration = metastable.initial_states, 0
    else:
        states, iteration = tuple(resume.states), resume.iteration
        if len(states) != metastable.entity_count:
            raise CountMismatch(f"resume snapshot has {len(states)} states for {metastable.entity_count} entities")
        for state in states:
            if state.kind is not metastable.state_domain.kind or not metastable.state_domain.contains(state.value):
                raise DomainMismatch(f"resume state {state} outside {metastable.state_domain}")

    entities = tuple(
        Entity(
            index=i,
            state=states[i],
            milieu=milieus[i],
            rules=metastable.rule_sources[metastable.rule_slot(i)],
            rule_slot=metastable.rule_slot(i),
        )
        for i in range(metastable.entity_count)
    )
    logger.info(f"Actualized {len(entities)} entities with {len(programs)} rule program(s) at t={iteration}")
    return ActualSystem(metastable, entities, tuple(programs), iteration)


def deactualize(actual: ActualSystem) -> MetastableSystem:
    """Project an actual system back onto its metastable parameters; actual is left untouched"""
    if not isinstance(actual, ActualSystem):
        raise RegimeError(f"deactualize needs an actual system, got {type(actual).__name__}")
    return actual.metastable


# ==== Iteration ====

def step(
    actual: ActualSystem,
    mode: ExecutionMode = ExecutionMode.BOUND,
    workers: int = 1,
    executor: Optional[Executor] = None
) -> ActualSystem:
    """
    Apply the update function to every entity once.

    All entities read from the snapshot of iteration t; the result is the system at t + 1.

    Args:
        actual: System in the actual regime
        mode: Faithful (interpolate and recompile) or Bound (run the compiled program)
        workers: Threads for per-entity evaluation when no executor is given
        executor: Pool to evaluate entities on

    Raises:
        RuleRuntimeError: Annotated with the failing entity and iteration
    """
    if not isinstance(actual, ActualSystem):
        raise RegimeError(f"step needs an actual system, got {type(actual).__name__}")

    mode = ExecutionMode(mode)
    snapshot = actual.states()
    t = actual.iteration
    started = time.perf_counter()

    def update(entity: Entity) -> StateValue:
        bindings = BindingSet.from_snapshot(snapshot, entity.index, entity.milieu.neighbors)
        try:
            return execute(mode, entity.rules, actual.programs[entity.rule_slot], bindings)
        except CurbError as e:
            raise e.annotate(entity=entity.index, iteration=t)

    if executor is not None:
        new_states = list(executor.map(update, actual.entities))
    elif workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            new_states = list(pool.map(update, actual.entities))
    else:
        new_states = [update(e) for e in actual.entities]

    entities = tuple(replace(e, state=s) for e, s in zip(actual.entities, new_states))
    logger.debug(f"Step t={t} -> {t + 1} in {(time.perf_counter() - started) * 1000:.1f} ms")
    return replace(actual, entities=entities, iteration=t + 1)


def evolve(
    actual: ActualSystem,
    iterations: int,
    mode: ExecutionMode = ExecutionMode.BOUND,
    workers: int = 1
) -> Iterator[ActualSystem]:
    """Lazily yield the systems at t + 1 .. t + iterations"""
    if iterations < 0:
        raise UsageError(f"iterations must be >= 0, got {iterations}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for _ in range(iterations):
                actual = step(actual, mode, executor=pool)
                yield actual
    else:
        for _ in range(iterations):
            actual = step(actual, mode)
            yield actual


def run(
    actual: ActualSystem,
    iterations: int,
    mode: ExecutionMode = ExecutionMode.BOUND,
    workers: int = 1
) -> Trajectory:
    """
    Iterate a system and record every state vector.

    Returns:
        Trajectory with iterations + 1 state vectors, the first being the current one
    """
    started = time.perf_counter()
    rows = [actual.states()]
    for system in evolve(actual, iterations, mode, workers):
        rows.append(system.states())
    logger.info(
        f"Ran {iterations} iteration(s) of {len(actual.entities)} entities "
        f"in {ExecutionMode(mode).value} mode ({time.perf_counter() - started:.2f}s)"
    )
    return Trajectory(tuple(rows), start=actual.iteration)
