"""Exception types shared across the toolkit."""


class ContractkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(ContractkitError, ValueError):
    """Shapes or grid metadata of the operands do not match."""


class ContractViolation(ContractkitError, ValueError):
    """A documented precondition of an operation was violated."""


class DegenerateWeightError(ContractkitError, ValueError):
    """The weighted norm vanishes on every probe direction."""


class DivergenceError(ContractkitError, RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, message, t=None, last_state=None):
        super().__init__(message)
        self.t = t
        self.last_state = last_state


class StiffnessError(ContractkitError, RuntimeError):
    """Adaptive step size underflowed; the problem is too stiff for the
    explicit integrator at the requested tolerance."""


class NumericalError(ContractkitError, RuntimeError):
    """A numerical backend (eigensolver, root finder) failed."""


class ConfigError(ContractkitError, ValueError):
    """Experiment configuration failed to parse or validate."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
