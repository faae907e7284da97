"""Exception hierarchy shared by every eqkit module."""

from typing import Any, Optional, Sequence


class EqkitError(ValueError):
    """Base class for all toolkit errors"""


class DomainError(EqkitError):
    """A strategy or input lies outside its domain"""

    def __init__(self, message: str, player: Optional[int] = None):
        super().__init__(message)
        self.player = player


class EvaluationError(EqkitError):
    """A utility or potential oracle returned an unusable value"""

    def __init__(self, message: str, profile: Optional[Sequence[Any]] = None):
        super().__init__(message)
        self.profile = tuple(profile) if profile is not None else None


class ParameterError(EqkitError):
    """Invalid constructor or solver parameters"""


class DimensionError(EqkitError):
    """Shapes of a game and a profile or distribution disagree"""


class UndefinedMetricError(EqkitError):
    """A metric is undefined at the requested point"""


class ConfigError(EqkitError):
    """Run configuration problem, located by field path and line when known"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if field:
            location += f" [field: {field}]"
        if line:
            location += f" [line {line}]"
        super().__init__(f"{message}{location}")
        self.field = field
        self.line = line


class MissingResultError(EqkitError):
    """A report section was requested but the analysis never produced it"""
