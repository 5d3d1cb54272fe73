"""
Pydantic models for system configuration files

SystemSpec is the validated form of a configuration: the full metastable parameter
set plus run controls. Kernel types (domain, topology, states, rule sources) are
built by the loader in src.utils and checked here across fields.
"""
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, InstanceOf, field_validator, model_validator

from .adaptation import DEFAULT_WEIGHTS, MutationOperator, MutationPolicy
from .codedata import ExecutionMode
from .metamodel.states import StateDomain, StateValue
from .metamodel.system import ConcretizationParams
from .metamodel.topology import TopologySpec
from .rule_language import RuleSource


# ==== Adaptation Models ====

class ScheduleSpec(BaseModel):
    """Adaptation every `every` iterations, `events` times"""
    every: int = Field(..., ge=1)
    events: int = Field(..., ge=0)

    def event_iterations(self, iterations: int) -> List[int]:
        """Iterations after which an adaptation takes effect within a run of `iterations`"""
        return [self.every * j for j in range(1, self.events + 1) if self.every * j < iterations]


class AdaptationSpec(BaseModel):
    schedule: Optional[ScheduleSpec] = None
    max_retries: int = Field(16, ge=1)
    max_depth: int = Field(3, ge=0)
    weights: Dict[str, float] = Field(
        default_factory=lambda: {op.value: w for op, w in DEFAULT_WEIGHTS.items()}
    )

    @field_validator('weights')
    @classmethod
    def check_weights(cls, v: Dict[str, float]) -> Dict[str, float]:
        known = {op.value for op in MutationOperator}
        unknown = sorted(set(v) - known)
        if unknown:
            raise ValueError(f"unknown mutation operator(s): {', '.join(unknown)}")
        if any(w < 0 for w in v.values()):
            raise ValueError("weights must be non-negative")
        if not any(w > 0 for w in v.values()):
            raise ValueError("at least one weight must be positive")
        return v

    def policy(self) -> MutationPolicy:
        return MutationPolicy(
            weights={MutationOperator(k): w for k, w in self.weights.items()},
            max_retries=self.max_retries,
            max_depth=self.max_depth,
        )


# ==== Output Models ====

class OutputSpec(BaseModel):
    trace: Path
    lineage: Path

    @property
    def record(self) -> Path:
        """JSON generation record written next to the lineage file"""
        return self.lineage.with_name(self.lineage.name + ".json")


# ==== System Model ====

class SystemSpec(BaseModel):
    """Complete configuration of one system and its run"""
    model_config = ConfigDict(frozen=True)

    entities: int = Field(..., gt=0, description="Number of entities")
    state_domain: InstanceOf[StateDomain]
    topology: InstanceOf[TopologySpec]
    initial_states: List[InstanceOf[StateValue]]
    rule_files: List[Path] = Field(..., min_length=1)
    rule_sources: List[InstanceOf[RuleSource]] = Field(..., min_length=1)
    shared: bool = True
    iterations: int = Field(0, ge=0, description="Iterations T; the trace has T + 1 rows")
    seed: int = Field(0, ge=0)
    mode: ExecutionMode = ExecutionMode.FAITHFUL
    workers: int = Field(1, ge=1)
    adaptation: AdaptationSpec = Field(default_factory=AdaptationSpec)
    output: OutputSpec
    config_path: Optional[Path] = None

    @model_validator(mode='after')
    def check_counts(self) -> "SystemSpec":
        if len(self.initial_states) != self.entities:
            raise ValueError(f"{len(self.initial_states)} initial states for {self.entities} entities")
        for i, state in enumerate(self.initial_states):
            if state.kind is not self.state_domain.kind or not self.state_domain.contains(state.value):
                raise ValueError(f"initial state {state} of entity {i} outside {self.state_domain}")
        if self.shared and len(self.rule_sources) != 1:
            raise ValueError("shared = true needs exactly one rule file")
        if not self.shared and len(self.rule_sources) != self.entities:
            raise ValueError(f"{len(self.rule_sources)} rule files for {self.entities} entities")
        return self

    def concretization_params(self) -> ConcretizationParams:
        return ConcretizationParams(
            entity_count=self.entities,
            state_domain=self.state_domain,
            topology=self.topology,
            initial_states=tuple(self.initial_states),
            rule_sources=tuple(self.rule_sources),
            rng_seed=self.seed,
            shared=self.shared,
        )
