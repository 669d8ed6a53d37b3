"""Exception hierarchy for the mpcr package.

Numerical operations raise subclasses of :class:`NumericalError`; parameter
and configuration problems raise subclasses of :class:`ConfigError`. The CLI
maps these onto distinct exit codes.
"""


class MpcrError(Exception):
    """Base class for all package errors."""


class ConfigError(MpcrError):
    """Invalid configuration, parameters, or command-line usage."""

    exit_code = 2


class OrderingViolation(ConfigError):
    """Replication probabilities are not sorted descending with a tied
    leading block."""


class EmptyPopulation(ConfigError):
    """Initial copy numbers sum to zero."""


class BadProbability(ConfigError):
    """A probability lies outside its admissible range."""


class DimensionMismatch(ConfigError):
    """Vector arguments disagree on the number of types."""


class NumericalError(MpcrError):
    """Failure inside a numerical operation."""

    exit_code = 3


class NegativeInput(NumericalError):
    """A nonnegative argument was negative."""


class BadTolerance(NumericalError):
    """Requested tolerance is not a positive real."""


class SolverFailure(NumericalError):
    """Root solver exhausted its bracket or iteration budget."""


class OverflowRisk(NumericalError):
    """Projected magnitude of an iterate exceeds the safe range."""


class CouplingViolation(NumericalError):
    """A coupled state lost the componentwise dominance of the majorant."""


class UnknownFigure(ConfigError):
    """Figure identifier is not one of A, 1, 2, 3."""


class EmptyInput(NumericalError):
    """An aggregation was asked to summarize zero records."""


class IoError(MpcrError):
    """File system failure while writing results."""

    exit_code = 4
