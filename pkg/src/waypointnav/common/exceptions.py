"""Exceptions raised across the package; the CLI maps these onto exit codes."""

from typing import Any, Optional


class WaypointNavError(Exception):
    pass


class InvalidPoseError(WaypointNavError, ValueError):
    pass


class GenerationError(WaypointNavError, ValueError):
    pass


class SamplingError(WaypointNavError, RuntimeError):
    pass


class NotAMotionError(WaypointNavError, ValueError):
    pass


class PlannerIncompleteError(WaypointNavError, RuntimeError):
    def __init__(self, message: str, best_partial_cost: float) -> None:
        super().__init__(message)
        self.best_partial_cost = best_partial_cost


class NumericError(WaypointNavError, ArithmeticError):
    pass


class NumericAbort(WaypointNavError, RuntimeError):
    def __init__(self, message: str, diagnostic: Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class DigestMismatchError(WaypointNavError, ValueError):
    pass


class ParseError(WaypointNavError, ValueError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class EnvironmentFault(WaypointNavError, RuntimeError):
    def __init__(self, message: str, env_index: int) -> None:
        super().__init__(f"env {env_index}: {message}")
        self.env_index = env_index
