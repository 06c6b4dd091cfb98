"""Exception types shared across the package."""


class SkillqError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SkillqError, ValueError):
    """An argument lies outside the mathematically valid domain."""


class ConfigError(SkillqError, ValueError):
    """A configuration document failed validation."""


class NumericalError(SkillqError, RuntimeError):
    """A numerical routine could not meet its accuracy contract."""


class TransformEvaluationError(NumericalError):
    """A Laplace transform returned a non-finite value."""

    def __init__(self, s: complex, message: str | None = None):
        self.s = s
        super().__init__(message or f"transform evaluation returned a non-finite value at s={s!r}")


class SingularSystemError(NumericalError):
    """A linear system is singular (zero pivot or singular factorization)."""

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(message or f"singular linear system (zero pivot at row {row})")


class ConvergenceError(NumericalError):
    """A solve finished but its residual misses the accuracy contract."""

    def __init__(self, residual: float, message: str | None = None):
        self.residual = residual
        super().__init__(message or f"linear solve missed its residual tolerance (residual {residual:.3e})")


class DegenerateRatesError(DomainError):
    """All rates driving a quantity are zero where a positive rate is required."""
