"""
State domains and state values.

A system's entities all take their states from one finite StateDomain: either the
booleans or a closed integer range. StateValue is the tagged scalar held by an
entity and the only kind of data a rule may read or emit.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Union

from ..errors import DomainMismatch


class DomainKind(str, Enum):
    BOOLEAN = "bool"
    INTEGER = "int"


RawState = Union[bool, int]


@dataclass(frozen=True)
class StateDomain:
    """Finite set of possible entity states"""

    kind: DomainKind
    lo: Optional[int] = None
    hi: Optional[int] = None

    def __post_init__(self):
        if self.kind is DomainKind.INTEGER:
            if self.lo is None or self.hi is None:
                raise DomainMismatch("integer range needs both bounds")
            if isinstance(self.lo, bool) or isinstance(self.hi, bool):
                raise DomainMismatch("integer range bounds must be integers")
            if self.lo > self.hi:
                raise DomainMismatch(f"integer range {self.lo}..{self.hi} is empty")
        elif self.lo is not None or self.hi is not None:
            raise DomainMismatch("boolean domain takes no bounds")

    @classmethod
    def boolean(cls) -> "StateDomain":
        return cls(DomainKind.BOOLEAN)

    @classmethod
    def integer_range(cls, lo: int, hi: int) -> "StateDomain":
        return cls(DomainKind.INTEGER, lo, hi)

    @classmethod
    def parse(cls, text: str) -> "StateDomain":
        """
        Parse the textual form used by configs and the CLI.

        Args:
            text: "bool" or "int <lo> <hi>"

        Raises:
            ValueError: If the text is not a domain specification
        """
        parts = text.split()
        if parts == ["bool"]:
            return cls.boolean()
        if len(parts) == 3 and parts[0] == "int":
            try:
                lo, hi = int(parts[1]), int(parts[2])
            except ValueError:
                raise ValueError(f"integer bounds expected in {text!r}")
            return cls.integer_range(lo, hi)
        raise ValueError(f"state domain must be 'bool' or 'int <lo> <hi>', got {text!r}")

    @property
    def is_boolean(self) -> bool:
        return self.kind is DomainKind.BOOLEAN

    def size(self) -> int:
        if self.is_boolean:
            return 2
        return self.hi - self.lo + 1

    def values(self) -> Iterator["StateValue"]:
        if self.is_boolean:
            yield StateValue(self.kind, False)
            yield StateValue(self.kind, True)
        else:
            for v in range(self.lo, self.hi + 1):
                yield StateValue(self.kind, v)

    def contains(self, raw: object) -> bool:
        if self.is_boolean:
            return isinstance(raw, bool)
        return isinstance(raw, int) and not isinstance(raw, bool) and self.lo <= raw <= self.hi

    def value(self, raw: RawState) -> "StateValue":
        """Wrap a raw scalar, raising DomainMismatch when it is not a member"""
        if not self.contains(raw):
            raise DomainMismatch(f"{raw!r} is not in state domain {self}")
        return StateValue(self.kind, raw)

    def coerce(self, raw: RawState) -> "StateValue":
        """Like value(), but accepts 0/1 for booleans (trace and config spelling)"""
        if self.is_boolean and not isinstance(raw, bool) and raw in (0, 1):
            raw = bool(raw)
        return self.value(raw)

    def lowest(self) -> "StateValue":
        return StateValue(self.kind, False) if self.is_boolean else StateValue(self.kind, self.lo)

    def on_value(self) -> "StateValue":
        """Value used for impulse initial conditions: true, 1 when in range, else hi"""
        if self.is_boolean:
            return StateValue(self.kind, True)
        if self.lo <= 1 <= self.hi:
            return StateValue(self.kind, 1)
        return StateValue(self.kind, self.hi)

    def __str__(self) -> str:
        if self.is_boolean:
            return "bool"
        return f"int {self.lo} {self.hi}"


@dataclass(frozen=True)
class StateValue:
    """Entity state: a scalar tagged with its domain kind"""

    kind: DomainKind
    value: RawState

    def as_int(self) -> int:
        """Numeric reading; booleans count as 0/1"""
        return int(self.value)

    def literal(self) -> str:
        """Rule-language literal text for this value"""
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        return str(self.value)

    def trace_text(self) -> str:
        return str(self.as_int())

    def __str__(self) -> str:
        return self.literal()
