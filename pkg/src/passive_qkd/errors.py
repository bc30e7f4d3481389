class QkdError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QkdError, ValueError):
    """An argument lies outside the domain an operation supports."""


class NumericalError(QkdError, ArithmeticError):
    """A numerical procedure failed to deliver a trustworthy result."""


class QuadratureError(NumericalError):
    def __init__(self, message, abs_error=float("nan")):
        super().__init__(f"{message} (estimated abs error {abs_error:.3e})")
        self.abs_error = abs_error


class ConsistencyError(NumericalError):
    """Two independent evaluation routes disagree beyond tolerance."""


class EstimationError(NumericalError):
    """Decoy-state estimation is ill-conditioned for the given statistics."""


class ConfigError(QkdError, ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))
