"""
Harness - drives the regime pipeline for one configuration.

run_system() executes define_virtual -> concretize -> actualize -> run and, when an
adaptation schedule is configured, interleaves deactualize -> adapt -> actualize
after the scheduled iterations. adapt_only() applies adaptation events without
running. replay_record() re-applies a saved generation record.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .adaptation import IdentifierCounter, TrackedRng, adapt, closure_probe, replay
from .config_models import SystemSpec
from .errors import CurbError, UsageError
from .metamodel.lineage import LineageEntry, source_hash
from .metamodel.states import StateValue
from .metamodel.system import (
    MetastableSystem, Snapshot, actualize, concretize, deactualize, define_virtual, evolve
)
from .rule_language import RuleSource, parse, render, tokenize

logger = logging.getLogger(__name__)


def event_seed(system_seed: int, generation: int) -> int:
    """Seed of the adaptation producing `generation`, derived from the system seed"""
    return int(np.random.SeedSequence([system_seed, generation]).generate_state(1)[0])


def concretize_spec(spec: SystemSpec) -> MetastableSystem:
    virtual = define_virtual(spec.state_domain.kind)
    return concretize(virtual, spec.concretization_params())


@dataclass
class RunResult:
    rows: List[Tuple[StateValue, ...]]
    system: MetastableSystem
    adaptations: List[LineageEntry] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.rows) - 1


def _adapt_event(
    spec: SystemSpec,
    system: MetastableSystem,
    counter: IdentifierCounter,
    states: Sequence[StateValue],
    iteration: int
) -> MetastableSystem:
    rng = TrackedRng(event_seed(spec.seed, system.lineage.next_generation))
    try:
        return adapt(
            system, spec.adaptation.policy(), rng, counter,
            probe=closure_probe(system, states), iteration=iteration
        )
    except CurbError as e:
        raise e.annotate(iteration=iteration)


def run_system(spec: SystemSpec) -> RunResult:
    """
    Run a configured system, adapting its rules on schedule.

    Returns:
        RunResult with T + 1 state vectors and the lineage entries of this run

    Raises:
        CurbError: Any kernel error, annotated with entity and iteration where known
    """
    system = concretize_spec(spec)
    actual = actualize(system)
    rows = [actual.states()]

    schedule = spec.adaptation.schedule
    events = schedule.event_iterations(spec.iterations) if schedule else []
    counter = IdentifierCounter.above(system.rule_sources)

    for end in events + [spec.iterations]:
        for actual in evolve(actual, end - actual.iteration, spec.mode, spec.workers):
            rows.append(actual.states())
        if end in events:
            adapted = _adapt_event(spec, deactualize(actual), counter, actual.states(), actual.iteration)
            actual = actualize(adapted, resume=Snapshot.of(actual))

    final = actual.metastable
    logger.info(f"Run complete: {len(rows)} rows, {len(final.lineage)} adaptation(s)")
    return RunResult(rows, final, list(final.lineage.entries))


def adapt_only(spec: SystemSpec, events: int) -> MetastableSystem:
    """
    Apply `events` adaptations to the configured system without running it.

    The rules are compiled first so an invalid configuration fails before any
    adaptation.
    """
    if events < 0:
        raise UsageError(f"events must be >= 0, got {events}")
    system = concretize_spec(spec)
    actualize(system)
    counter = IdentifierCounter.above(system.rule_sources)
    for _ in range(events):
        system = _adapt_event(spec, system, counter, system.initial_states, 0)
    return system


@dataclass(frozen=True)
class ReplayOutcome:
    entry: LineageEntry
    parent_matches: bool
    child_matches: bool
    child: RuleSource

    @property
    def reproduced(self) -> bool:
        return self.parent_matches and self.child_matches


def replay_record(
    entries: Sequence[LineageEntry],
    roots: Sequence[RuleSource]
) -> List[ReplayOutcome]:
    """
    Re-apply every recorded mutation in order.

    Args:
        entries: Lineage entries with descriptors
        roots: Starting rule sources; one shared root, or one per entity

    Returns:
        One outcome per entry, telling whether the recorded hashes were reproduced
    """
    if not roots:
        raise UsageError("replay needs at least one root rule source")
    current: Dict[Optional[int], RuleSource] = {}
    outcomes = []
    for entry in entries:
        key = entry.entity
        if key not in current:
            current[key] = roots[0] if key is None or len(roots) == 1 else roots[key]
        parent = current[key]
        parent_matches = source_hash(parent) == entry.parent_hash
        child = render(replay(parse(tokenize(parent)), entry.descriptor))
        child = RuleSource(child.text, name=parent.name)
        outcomes.append(ReplayOutcome(entry, parent_matches, source_hash(child) == entry.child_hash, child))
        current[key] = child
    return outcomes
