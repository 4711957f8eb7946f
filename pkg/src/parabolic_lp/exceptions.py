"""Exception hierarchy.

Each class carries the CLI exit code it maps to.
"""


class PLPError(Exception):
    exit_code = 1


class StructuralError(PLPError, ValueError):
    """Shapes, lengths or grids do not line up."""

    exit_code = 3


class ConfigurationError(PLPError, ValueError):
    """A parameter is out of its admissible range."""

    exit_code = 3


class DataError(PLPError, ValueError):
    """Input samples are unusable (NaN, Inf, unreadable file)."""

    exit_code = 4


class PreconditionError(PLPError, ValueError):
    """An operation's documented precondition does not hold for the input."""

    exit_code = 4


class HypothesisError(PLPError, ValueError):
    """An inequality was requested outside the hypotheses it is stated under."""

    exit_code = 3
