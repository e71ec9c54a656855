"""Exception types shared across the solver."""


class EvapflowError(Exception):
    """Base class for all package errors."""


class ConfigurationError(EvapflowError):
    """Invalid or inconsistent setup (grids, parameters, scenario files).

    ``violations`` lists every individual problem so a config file can be
    fixed in one pass.
    """

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [message]


class OutOfDomainError(EvapflowError):
    """A sample point lies outside the grid bounding box."""


class SolverError(EvapflowError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class CflError(EvapflowError):
    """Advective CFL limit violated in strict mode."""


class ProjectionError(EvapflowError):
    """Closest-point projection did not converge.

    Carries the last iterate and residuals for diagnosis.
    """

    def __init__(self, message, last_points=None, residuals=None):
        super().__init__(message)
        self.last_points = last_points
        self.residuals = residuals
