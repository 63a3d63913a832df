"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class DegenerateDistributionError(DomainError):
    """The requested distribution collapses to a point mass."""


class ConvergenceError(ArithmeticError):
    """An iterative numerical method failed to converge."""
