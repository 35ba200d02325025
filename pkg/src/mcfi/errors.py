"""Exception and warning types shared across the package."""


class MCFIError(Exception):
    """Base class for all package errors."""


class DimensionError(MCFIError, ValueError):
    """Array length or shape does not match the grid / design."""


class DivergenceError(MCFIError, FloatingPointError):
    """Non-finite values appeared while marching in time."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")


class DegenerateInputError(MCFIError, ValueError):
    pass


class AmbiguousAlignmentError(MCFIError, ValueError):
    """Mode is orthogonal to the alignment reference; the sign is undefined."""


class NonDifferentiableError(MCFIError, ArithmeticError):
    """Objective evaluated at a point where its gradient is undefined."""


class SingularSystemError(MCFIError, ArithmeticError):
    pass


class ConfigError(MCFIError, ValueError):
    pass


class NearDegenerateWarning(UserWarning):
    """Adjacent singular values nearly coincide; mode derivatives are unreliable."""


class IllConditionedWarning(UserWarning):
    pass
