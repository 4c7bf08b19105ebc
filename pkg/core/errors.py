from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from core.models.solution import OptimizationResult


class RelayError(Exception):
    """Base class for every error raised by the relay optimizer."""


class DomainError(RelayError, ValueError):
    """An operation was called outside of its mathematical domain."""


class ConfigError(RelayError, ValueError):
    """A scenario, solver option or sweep description is invalid."""


class SolverError(RelayError, RuntimeError):
    """A numerical solver stopped before reaching its tolerance.

    Args:
        message: What went wrong.
        best_iterate: The best point the solver produced before stopping.
        residual: Optimality residual at ``best_iterate``.
    """

    def __init__(self, message: str, best_iterate: Any = None, residual: float = float("nan")):
        super().__init__(message)
        self.best_iterate = best_iterate
        self.residual = residual


class OptimizationError(SolverError):
    """The alternating optimizer failed; carries the best result reached so far."""

    def __init__(self, message: str, best_result: "OptimizationResult | None" = None):
        super().__init__(message, best_iterate=best_result)
        self.best_result = best_result
