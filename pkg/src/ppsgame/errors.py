"""Exception types shared across the package."""


class PPSGameError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PPSGameError):
    """Malformed or inconsistent input data."""


class ParseError(PPSGameError):
    """Unreadable game-specification file."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class CycleDetected(ValidationError):
    """The task graph contains a directed cycle."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("cycle through nodes: " + " -> ".join(self.cycle))


class DuplicateId(ValidationError):
    """A node or task identifier occurs more than once."""


class DanglingNode(ValidationError):
    """A task references a node that was never declared."""


class InvalidKnowledgeState(ValidationError):
    """A solved-task set is not closed under predecessors."""


class InvalidPair(ValidationError):
    """A nested open-set pair violates containment or closure."""


class StateSpaceExceeded(PPSGameError):
    """An enumeration would produce more states than the configured cap."""


class AssignmentSpaceExceeded(PPSGameError):
    """A per-state assignment enumeration exceeds the configured cap."""


class CoalitionSpaceExceeded(PPSGameError):
    """Coalition enumeration requested for more agents than the cap allows."""


class NotALine(PPSGameError):
    """A line-only operation was applied to a non-linear network."""


class SingleAgent(PPSGameError):
    """An operation that needs competition was called with one agent."""


class EmptyStackelbergSet(PPSGameError):
    """A committed-agent set was required but empty or missing."""


class NonPositiveParameter(ValidationError):
    """A rate, ability, simplicity, or scale that must be > 0 is not."""


class InapplicableChecker(PPSGameError):
    """The requested condition check does not apply to this game."""
