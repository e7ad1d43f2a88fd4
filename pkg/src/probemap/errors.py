"""Exception types shared across the toolkit."""


class ProbemapError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(ProbemapError, ValueError):
    """An argument violates a documented precondition."""


class NotFoundError(ProbemapError, LookupError):
    """A referenced node, edge, or resource does not exist."""


class FormatError(ProbemapError, ValueError):
    """A file does not conform to its expected format."""


class InvariantViolation(ProbemapError, RuntimeError):
    """An internal data-structure invariant was broken (a bug, not bad input)."""


class StageError(ProbemapError, RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
