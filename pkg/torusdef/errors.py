from typing import ClassVar


class TorusdefError(Exception):
    """Base class for errors the CLI knows how to report"""

    exit_code: ClassVar[int] = 4


class ConfigError(TorusdefError, ValueError):
    """Input data is malformed or mathematically inconsistent"""

    exit_code: ClassVar[int] = 2


class CocycleError(ConfigError):
    """A 2-cocycle table fails normalization or the cocycle identity"""

    def __init__(self, message: str, elements: tuple[int, ...]) -> None:
        super().__init__(message)
        self.elements = elements


class BudgetExceededError(TorusdefError):
    exit_code: ClassVar[int] = 3

    def __init__(self, stage: str, required: int, budget: int) -> None:
        super().__init__(
            f"{stage}: {required} candidate tuples needed, budget is {budget}"
        )
        self.stage = stage
        self.required = required
        self.budget = budget


class InvariantViolation(TorusdefError):
    """An internal consistency check failed; results must not be trusted"""

    exit_code: ClassVar[int] = 4
