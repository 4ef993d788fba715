"""Exception hierarchy.

Domain errors (``DomainError`` subclasses) signal that a state left the
physical domain; integrators catch them and shrink the step.  Invariant
violations are raised when a model is constructed with inconsistent data.
"""


class ThermoError(Exception):
    """Base class for all library errors."""


class DomainError(ThermoError, ValueError):
    """State is outside the admissible set of the model."""


class NonPositiveTemperature(DomainError):
    pass


class NegativeMoles(DomainError):
    pass


class NegativeVolume(DomainError):
    pass


class NonPositiveDensity(DomainError):
    pass


class SingularMassMatrix(ThermoError, ArithmeticError):
    pass


class SingularHeatCapacity(ThermoError, ArithmeticError):
    pass


class DimensionMismatch(ThermoError, ValueError):
    pass


class InvariantViolation(ThermoError, ValueError):
    """A model invariant failed; ``invariant`` names it."""

    invariant = "model invariant"

    def __init__(self, message="", invariant=None):
        if invariant is not None:
            self.invariant = invariant
        super().__init__(f"{self.invariant}: {message}" if message else self.invariant)


class AsymmetricConductivity(InvariantViolation):
    invariant = "conductivity symmetry"


class NegativeConductivity(InvariantViolation):
    invariant = "conductivity nonnegativity"


class StoichiometryMassViolation(InvariantViolation):
    invariant = "Lavoisier"


class InvalidOnsager(InvariantViolation):
    invariant = "Onsager"


class StepRejected(ThermoError):
    """A step could not be completed inside the admissible domain."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class MaxStepsExceeded(ThermoError):
    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class InsufficientSamples(ThermoError, ValueError):
    pass


class ParseError(ThermoError, ValueError):
    """Malformed scenario file; message carries the line or field."""
