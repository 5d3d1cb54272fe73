"""
Rule lineage - the append-only history of update-rule versions.

Every adaptation appends one entry carrying the parent and child source hashes and
the descriptor of the mutation that produced the child.
"""
import hashlib
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from ..rule_language.lexer import RuleSource, tokenize
from ..rule_language.parser import parse
from ..rule_language.renderer import render


def source_hash(source: RuleSource) -> str:
    """64-bit hex digest of the canonical rendering of a rule source"""
    canonical = render(parse(tokenize(source))).text
    return hashlib.blake2b(canonical.encode("utf-8"), digest_size=8).hexdigest()


@dataclass(frozen=True)
class MutationDescriptor:
    """
    What one mutation did, precisely enough to replay it.

    site is "expression" (path addresses one expression node, replaced by the parsed
    `after` fragment) or "statements" (path addresses a block; `span` statements
    starting at `index` are replaced by the parsed `after` fragment).
    """

    operator: str
    site: str
    path: Tuple[Any, ...]
    before: str
    after: str
    index: int = 0
    span: int = 0
    draws: int = 0
    entity: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['path'] = list(self.path)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MutationDescriptor":
        data = dict(data)
        data['path'] = tuple(data.get('path', ()))
        return cls(**data)


@dataclass(frozen=True)
class LineageEntry:
    generation: int
    parent_hash: str
    child_hash: str
    operator: str
    entity: Optional[int]
    seed: int
    descriptor: MutationDescriptor
    iteration: Optional[int] = None

    def record(self) -> str:
        """One line of the lineage log"""
        entity = "shared" if self.entity is None else str(self.entity)
        line = (f"gen={self.generation} parent={self.parent_hash} child={self.child_hash} "
                f"op={self.operator} entity={entity} seed={self.seed}")
        if self.iteration is not None:
            line += f" t={self.iteration}"
        return line

    def to_dict(self) -> Dict[str, Any]:
        return {
            'generation': self.generation,
            'parent_hash': self.parent_hash,
            'child_hash': self.child_hash,
            'operator': self.operator,
            'entity': self.entity,
            'seed': self.seed,
            'iteration': self.iteration,
            'descriptor': self.descriptor.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LineageEntry":
        return cls(
            generation=data['generation'],
            parent_hash=data['parent_hash'],
            child_hash=data['child_hash'],
            operator=data['operator'],
            entity=data.get('entity'),
            seed=data['seed'],
            descriptor=MutationDescriptor.from_dict(data['descriptor']),
            iteration=data.get('iteration'),
        )


@dataclass(frozen=True)
class RuleLineage:
    entries: Tuple[LineageEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def next_generation(self) -> int:
        return len(self.entries) + 1

    def append(self, entry: LineageEntry) -> "RuleLineage":
        return RuleLineage(self.entries + (entry,))
