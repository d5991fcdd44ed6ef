"""Exception hierarchy. The CLI maps these onto exit codes."""


class OpenQBMError(Exception):
    """Base class for all package errors."""


class ConfigError(OpenQBMError, ValueError):
    """Invalid experiment configuration or physical parameters."""


class NumericalError(OpenQBMError, ArithmeticError):
    """A solver or quadrature failed to produce a trustworthy number."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""


class InfraredDivergenceError(ConfigError):
    """The spectral density does not vanish fast enough as omega -> 0."""


class StabilityError(NumericalError):
    """A time step exceeds the explicit-scheme stability bound."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class BudgetExceededError(OpenQBMError):
    """The brute-force path sum would exceed the configured cost budget."""

    def __init__(self, message, cost=None, budget=None):
        super().__init__(message)
        self.cost = cost
        self.budget = budget
