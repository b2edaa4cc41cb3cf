"""Exception types shared across the package."""


class CPForceError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CPForceError, ValueError):
    """Input outside the mathematical domain of an operation."""


class PoleError(CPForceError, ValueError):
    """Evaluation hit (or came numerically too close to) a pole.

    Attributes
    ----------
    location : the offending coordinate (wavenumber, frequency or state
        index, depending on the operation).
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class QuadratureError(CPForceError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the achieved estimate and the error bound reported by the
    integrator so callers can decide whether to proceed anyway.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class ConvergenceError(CPForceError, RuntimeError):
    """Iterative solver did not converge; ``history`` holds the residuals."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class UnphysicalRegimeError(CPForceError, RuntimeError):
    """The solver was driven into a regime where the model breaks down."""


class DegeneracyError(CPForceError, ValueError):
    """Quasi-degenerate transitions; the decoupled master equation and the
    force decomposition built on it do not apply.

    Attributes
    ----------
    pairs : offending transition index pairs.
    """

    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = list(pairs) if pairs is not None else []


class ConfigError(CPForceError, ValueError):
    """Malformed or inconsistent run configuration."""
