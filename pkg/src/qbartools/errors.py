"""Exception types shared across the toolkit."""


class QbarError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(QbarError, ValueError):
    """A domain-type invariant was violated."""


class DomainError(QbarError, ValueError):
    """An argument lies outside the physical domain (e.g. f <= 0)."""


class DataError(QbarError):
    """Input samples are unusable (zero magnitude, too few points, ...)."""


class NormalizationError(QbarError):
    """Baseline normalization cannot proceed (edge window too narrow)."""


class NoResonanceError(QbarError):
    """No resonant feature found above the noise floor."""


class DegenerateFitError(QbarError):
    """The least-squares normal matrix is singular."""


class InstabilityError(QbarError):
    """Density-matrix evolution became unphysical; reduce the step size."""


class ConfigurationError(QbarError):
    """Invalid Hilbert-space or run configuration."""


class ResourceError(QbarError):
    """Requested scan exceeds the configured size budget."""


class ParseError(QbarError):
    """Malformed input file; carries a line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
