"""Error hierarchy shared by services, handlers and the CLI."""
from typing import Any


class PlasmaError(Exception):
    """Root of all toolkit errors."""


class ConfigError(PlasmaError, ValueError):
    """Invalid experiment configuration."""


class InvalidPotentialError(ConfigError):
    """Potential coefficients violate one of the standing assumptions."""


class DomainError(PlasmaError, ValueError):
    """Parameter outside the range where a formula is defined."""


class NumericError(PlasmaError):
    """A numerical procedure failed."""


class QuadratureError(NumericError):
    """Quadrature could not produce a finite estimate."""


class RefinementExhaustedError(QuadratureError):
    """Quadrature did not converge within the allowed refinements."""

    def __init__(self, estimate: float, error_bound: float, refinements: int):
        super().__init__(
            f"quadrature did not converge after {refinements} refinements "
            f"(last estimate {estimate!r}, error bound {error_bound!r})"
        )
        self.estimate = estimate
        self.error_bound = error_bound
        self.refinements = refinements


class BracketError(NumericError):
    """Root bracket endpoints have the same sign."""

    def __init__(self, lo: float, hi: float, g_lo: float, g_hi: float):
        super().__init__(
            f"invalid bracket [{lo!r}, {hi!r}]: g(lo)={g_lo!r}, g(hi)={g_hi!r} have the same sign"
        )
        self.lo = lo
        self.hi = hi
        self.g_lo = g_lo
        self.g_hi = g_hi


class DegeneratePointError(NumericError):
    """The Laplacian vanishes to all orders at the requested point."""


class StalledDescentError(NumericError):
    """Line search failed while the gradient is still large."""

    def __init__(self, last_iterate: Any, gradient_norm: float):
        super().__init__(f"descent stalled with gradient sup-norm {gradient_norm!r}")
        self.last_iterate = last_iterate
        self.gradient_norm = gradient_norm


class SampleValidationError(NumericError):
    """A sample contains coincident particles."""


class VerificationFailure(PlasmaError):
    """A verification check exceeded its bound."""
