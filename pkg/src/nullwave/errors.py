"""Exception types shared across the package."""


class DomainError(ValueError):
    """Point outside the region where an operation is defined."""


class ParamError(ValueError):
    """Invalid construction or call parameters."""


class OrderError(ValueError):
    """Requested derivative/recursion order not supported."""


class CFLError(RuntimeError):
    """Time step violates the stability limit."""


class NaNError(FloatingPointError):
    """Non-finite values detected in a field."""


class FitError(RuntimeError):
    """Decay fit cannot be performed on the given series."""


class NoConvergence(RuntimeError):
    """Picard iteration failed to reach tolerance.

    Carries the iteration count and the residual history.
    """

    def __init__(self, iterations, residuals):
        self.iterations = iterations
        self.residuals = list(residuals)
        last = self.residuals[-1] if self.residuals else float("nan")
        super().__init__(
            "no convergence after %d iterations (last residual %.3e)"
            % (iterations, last)
        )


class FormatError(ValueError):
    """Malformed binary or text artifact file."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""
