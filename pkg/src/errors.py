from __future__ import annotations

from typing import List, Tuple


class ConsensusError(Exception):
    """Base class for every error raised by this package."""


class InputError(ConsensusError, ValueError):
    pass


class CapacityError(ConsensusError):
    pass


class ConfigError(ConsensusError, ValueError):
    pass


class ScopeViolationError(ConfigError):
    def __init__(self, report) -> None:
        self.report = report
        super().__init__(f"threat scope violated: {report.describe()}")


class ScenarioParseError(ConfigError):
    def __init__(self, errors: List[Tuple[int, str]]) -> None:
        self.errors = list(errors)
        super().__init__("\n".join(f"line {line}: {msg}" for line, msg in self.errors))
