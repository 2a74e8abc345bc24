"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands do not have compatible shapes for the requested operation."""


class DegenerateInputError(ValueError):
    """An input that must be nonzero (or nondegenerate) is not."""


class AssumptionViolationError(RuntimeError):
    """The spectral-gap hypothesis fails: no unique simple leading eigenvalue.

    Carries the two offending eigenvalues in ``mu_pair``.
    """

    def __init__(self, message, mu_pair=None):
        super().__init__(message)
        self.mu_pair = mu_pair


class IntegrationFailureError(RuntimeError):
    """The ODE integrator failed (step underflow or non-finite state)."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class ResolutionError(RuntimeError):
    """Adaptive refinement exceeded its sample budget."""


class NotARegularCrossingError(ValueError):
    """Direction requested at a point that is not a regular crossing."""


class ConfigurationError(ValueError):
    """A run configuration or truncation request cannot be satisfied."""


class WaveConstructionError(RuntimeError):
    """Front/pulse profile construction did not converge."""


class HypothesisNotSatisfiedError(RuntimeError):
    """An operation was invoked on a system outside its hypotheses."""


class FormulaInapplicableError(RuntimeError):
    """A derivative formula requires conditions (e.g. D(0)=0) that fail."""
