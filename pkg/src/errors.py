"""
Error hierarchy for the Curb kernel.

Every failure a rule, a configuration or an adaptation can cause is a CurbError.
Each family carries the process exit code the CLI reports for it, and any error
can be annotated with the entity index and iteration it was raised at.
"""
from enum import Enum
from typing import Optional


class CurbError(Exception):
    """Base class for all kernel errors"""

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.entity: Optional[int] = None
        self.iteration: Optional[int] = None

    def annotate(self, entity: Optional[int] = None, iteration: Optional[int] = None) -> "CurbError":
        """Attach entity/iteration context (first annotation wins) and return self"""
        if self.entity is None and entity is not None:
            self.entity = entity
        if self.iteration is None and iteration is not None:
            self.iteration = iteration
        return self

    def __str__(self) -> str:
        context = []
        if self.entity is not None:
            context.append(f"entity {self.entity}")
        if self.iteration is not None:
            context.append(f"t={self.iteration}")
        if context:
            return f"{self.message} ({', '.join(context)})"
        return self.message


class UsageError(CurbError):
    """An operation was called with a violated precondition"""


class RegimeError(UsageError):
    """An operation was called on a system in the wrong regime"""


class TraceIOError(CurbError):
    """Reading or writing a trace or lineage file failed"""


# ==== Configuration ====

class ConfigError(CurbError):
    exit_code = 2


class ConfigParseError(ConfigError):
    """Config file could not be read or parsed"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        location = ""
        if path:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")
        self.line = line
        self.path = path


class ConfigSemanticError(ConfigError):
    """Config parsed but its values are inconsistent"""


# ==== System model ====

class ModelError(CurbError):
    exit_code = 2


class DomainMismatch(ModelError):
    """A state value lies outside the system's state domain"""


class CountMismatch(ModelError):
    """A sequence length disagrees with the entity count"""


class TopologyError(ModelError):
    """A topology cannot be materialised for the requested entity count"""


class ExplicitIndexOutOfRange(TopologyError):
    pass


# ==== Rule language ====

class LanguageError(CurbError):
    exit_code = 3


class LexError(LanguageError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at {line}:{column}")
        self.line = line
        self.column = column


class VocabularyViolation(LanguageError):
    """A word outside the rule vocabulary was found"""

    def __init__(self, word: str, line: int, column: int):
        super().__init__(f"word {word!r} is not in the rule vocabulary at {line}:{column}")
        self.word = word
        self.line = line
        self.column = column


class RuleSyntaxError(LanguageError):
    def __init__(self, expected: str, found: str, line: int, column: int):
        super().__init__(f"expected {expected}, found {found} at {line}:{column}")
        self.expected = expected
        self.found = found
        self.line = line
        self.column = column


class ValidationIssue(str, Enum):
    BAD_IDENTIFIER = "BadIdentifier"
    TYPE_MISMATCH = "TypeMismatch"
    NO_EMIT = "NoEmit"
    MILIEU_INDEX_OUT_OF_RANGE = "MilieuIndexOutOfRange"


class ValidationError(LanguageError):
    def __init__(self, issue: ValidationIssue, detail: str):
        super().__init__(f"{issue.value}: {detail}")
        self.issue = issue
        self.detail = detail


# ==== Rule execution ====

class RuntimeIssue(str, Enum):
    DIVISION_BY_ZERO = "DivisionByZero"
    NEGATIVE_MILIEU_INDEX = "NegativeMilieuIndex"
    MILIEU_INDEX_OUT_OF_RANGE = "MilieuIndexOutOfRange"
    FUEL_EXHAUSTED = "FuelExhausted"


class RuleRuntimeError(CurbError):
    exit_code = 4

    def __init__(self, message: str, issue: Optional[RuntimeIssue] = None):
        if issue is not None:
            message = f"{issue.value}: {message}"
        super().__init__(message)
        self.issue = issue


class NoEmitExecuted(RuleRuntimeError):
    def __init__(self):
        super().__init__("rule finished without executing an emit")


class EmittedValueOutOfDomain(RuleRuntimeError):
    def __init__(self, raw: str, domain: str):
        super().__init__(f"emitted value {raw} is outside state domain {domain}")
        self.raw = raw
        self.domain = domain


class UnparsableCapture(RuleRuntimeError):
    def __init__(self, raw: str, domain: str):
        super().__init__(f"captured output {raw!r} is not a {domain} value")
        self.raw = raw
        self.domain = domain


class NonConstantMilieuIndexInFaithfulMode(RuleRuntimeError):
    def __init__(self, line: int, column: int):
        super().__init__(
            f"milieu index at {line}:{column} is not a literal and cannot be interpolated; "
            f"use bound mode for computed indices"
        )
        self.line = line
        self.column = column


# ==== Adaptation ====

class AdaptationError(CurbError):
    exit_code = 5


class NoApplicableOperator(AdaptationError):
    """The drawn mutation operator has no site in the parent program"""


class AdaptationFailed(AdaptationError):
    def __init__(self, attempts: int, last_reason: str):
        super().__init__(f"no valid candidate after {attempts} attempts (last: {last_reason})")
        self.attempts = attempts
        self.last_reason = last_reason
