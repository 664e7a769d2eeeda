"""Exception types shared across the package."""

from __future__ import annotations


class ValidationError(ValueError):
    """A parameter or input lies outside its declared domain."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ModelOverflow(ArithmeticError):
    """A total is too large to represent as a finite float.

    ``log_magnitude`` carries the natural-log scale of the growth term
    (``d * log(r)`` for the closed forms) so callers can still report it.
    """

    def __init__(self, log_magnitude: float, message: str | None = None):
        self.log_magnitude = float(log_magnitude)
        super().__init__(message or f"value overflows float range (log-magnitude {self.log_magnitude:.6g})")


class DivergentHorizon(ArithmeticError):
    """An infinite-horizon quantity was requested for a non-subcritical ratio."""


class InfeasibleLever(ValueError):
    """The parameter value that would make the ratio critical lies outside its domain."""

    def __init__(self, name: str, value: float, message: str | None = None):
        self.name = name
        self.value = value
        super().__init__(message or f"critical {name} = {value:.6g} lies outside the domain of {name}")


class NotConverged(ArithmeticError):
    """Power iteration hit its iteration limit; ``estimate`` holds the best guess."""

    def __init__(self, estimate, message: str | None = None):
        self.estimate = estimate
        super().__init__(message or f"power iteration did not converge after {estimate.iterations} iterations "
                                    f"(best estimate {estimate.rho:.10g})")


class StepTooLarge(ArithmeticError):
    """The fixed integration step broke conservation, positivity or monotonicity."""


class ScenarioParseError(ValidationError):
    """Malformed scenario text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1, key: str | None = None):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}", key=key)
