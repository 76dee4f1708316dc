"""Exception hierarchy for lowdisc.

Input problems subclass ValueError and numerical breakdowns subclass
RuntimeError, so callers (and the CLI exit-code mapping) can tell the two
families apart without enumerating every class.
"""

from typing import Any, Optional, Tuple


class LowdiscError(Exception):
    """Base class for all lowdisc errors."""


class DomainError(LowdiscError, ValueError):
    """Argument outside the domain of the operation."""


class ConfigurationError(LowdiscError, ValueError):
    """Invalid precision, tolerance or configuration file contents."""


class PrecisionMismatchError(ConfigurationError):
    """A value bound to one precision context was handed to another."""


class PreconditionError(LowdiscError, ValueError):
    """Inputs are well-formed but violate an operation's precondition."""


class LowdefFailure(PreconditionError):
    """The admissibility condition of the lambda bound does not hold."""


class ReferenceUnavailableError(LowdiscError):
    """The independent L(1/2) reference is not offered at this size."""


class EmptyResultError(LowdiscError, ValueError):
    """No admissible input to aggregate."""


class NumericalFailure(LowdiscError, RuntimeError):
    """A numerical procedure did not reach its accuracy target.

    Attributes:
        residual: Last measured residual, if one exists
    """

    def __init__(self, message: str, residual: Any = None):
        super().__init__(message)
        self.residual = residual


class IncompleteZeroListError(NumericalFailure):
    """A zero may have been missed; ``interval`` brackets the suspect region."""

    def __init__(self, message: str, interval: Optional[Tuple[Any, Any]] = None, residual: Any = None):
        super().__init__(message, residual=residual)
        self.interval = interval


class SingularConfigurationError(NumericalFailure):
    """Two zero positions coincide, so the flow field is undefined."""


class StiffnessError(NumericalFailure):
    """The integrator step size underflowed."""
