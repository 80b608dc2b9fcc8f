"""Exception hierarchy shared by all modules.

Validation problems derive from :class:`ValidationError` (a ``ValueError``);
failures of a numerical procedure derive from :class:`NumericalError`.
The CLI maps the two families to different exit codes.
"""


class ValidationError(ValueError):
    """Inputs violate a documented precondition."""


class InvalidParameterError(ValidationError):
    """Coefficients are outside the admissible set (or the well-posed set)."""


class DomainError(ValidationError):
    """A formula was evaluated outside the parameter regime where it holds."""


class InsufficientDataError(ValidationError):
    """Too few usable samples for a fit or a classification."""


class BoundViolationError(ValidationError):
    """Source term or initial value exceeds the comparison bound."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to deliver a result."""


class StepSizeError(NumericalError):
    """Adaptive step size fell below the configured minimum."""


class ConvergenceError(NumericalError):
    """Fixed-point iteration did not reach the requested tolerance."""
