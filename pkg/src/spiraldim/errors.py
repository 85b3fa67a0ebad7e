"""Exception hierarchy shared by the library and the command line."""


class SpiralDimError(Exception):
    """Base class for library errors."""


class DomainError(SpiralDimError, ValueError):
    """Argument outside the domain of a function."""


class IntegrationError(SpiralDimError, RuntimeError):
    """Step-size underflow or non-finite state in the ODE integrator."""


class RefinementError(SpiralDimError, RuntimeError):
    """Trajectory sampling could not satisfy the angle contract."""


class AngularJumpError(SpiralDimError, ValueError):
    """Consecutive points subtend too large an angle to unwrap safely."""


class EmptyTraceError(SpiralDimError, ValueError):
    """An operation would leave no samples."""


class SpanError(SpiralDimError, ValueError):
    """The trace covers too little angle for the requested check."""


class BracketError(SpiralDimError, RuntimeError):
    """Sign data inconsistent with the sampling density."""


class InsufficientWavesError(SpiralDimError, ValueError):
    """Too few wave pairs for the decay fit."""


class NoRootError(SpiralDimError, RuntimeError):
    """A bracketed equation has no root in the expected period."""


class MultiplicityError(SpiralDimError, RuntimeError):
    """More than one root where uniqueness was expected."""


class DensityError(SpiralDimError, ValueError):
    """Point spacing too coarse for the requested scale."""


class MemoryBudgetError(SpiralDimError, MemoryError):
    """A raster or cell set would exceed the configured budget."""


class EstimationError(SpiralDimError, RuntimeError):
    """The regression window could not be established."""


class CalibrationError(SpiralDimError, RuntimeError):
    """A calibration curve missed its tolerance."""


class BoundViolation(SpiralDimError, AssertionError):
    """A numerically checked inequality failed."""
