"""Named error classes shared by the library and the command line."""


class LevelSpecError(Exception):
    """Base class for every error the command line reports by name."""

    exit_code = 2


class DimensionError(LevelSpecError, ValueError):
    exit_code = 3


class GuardExceededError(LevelSpecError):
    """A configured feasibility guard (order, level, ...) was exceeded."""

    exit_code = 4


class PreconditionError(LevelSpecError, ValueError):
    exit_code = 5


class ClaimViolationError(LevelSpecError):
    """A structural cap that the counting argument relies on did not hold."""

    exit_code = 6


class FormatError(LevelSpecError, ValueError):
    exit_code = 2


def check_guard(name: str, value: int, limit: int) -> None:
    if value > limit:
        raise GuardExceededError(f"{name}={value} exceeds the configured limit {limit}")
