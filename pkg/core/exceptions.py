"""
Error types raised by the simulation, optimization and sensitivity layers.

Most errors subclass a builtin (ValueError, RuntimeError, ...) so callers that
only care about the broad category can keep catching the builtin.
"""

from typing import Any, Optional


class MemorySimulationError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(MemorySimulationError, ValueError):
    """Solver or sweep configuration cannot be used as given."""


class InvalidArgumentError(MemorySimulationError, ValueError):
    """An operation received arguments outside its domain."""


class IntegrationDivergedError(MemorySimulationError, RuntimeError):
    """
    Non-finite field values appeared while integrating.

    Fields are checked periodically, so the first non-finite value lies after
    last_finite_step and at or before step.
    """

    def __init__(
        self,
        step: int,
        tau: float,
        member: Optional[int] = None,
        last_finite_step: int = 0,
        last_finite_tau: Optional[float] = None,
    ):
        self.step = step
        self.tau = tau
        self.member = member
        self.last_finite_step = last_finite_step
        self.last_finite_tau = last_finite_tau
        where = f" (batch member {member})" if member is not None else ""
        span = f", tau in ({last_finite_tau:.6g}, {tau:.6g}]" if last_finite_tau is not None else f", tau={tau:.6g}"
        super().__init__(
            f"integration diverged between steps {last_finite_step} and {step}{span}{where}"
        )


class UndefinedFidelityError(MemorySimulationError, ValueError):
    """Overlap fidelity requested for an envelope with zero energy."""


class MissingOptimumError(MemorySimulationError, KeyError):
    """No optimum is available for the requested memory point."""

    def __init__(self, point: Any, detail: str = ""):
        self.point = point
        message = f"no optimum available for memory point {point}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return self.args[0]


class PoisonedSampleError(MemorySimulationError, RuntimeError):
    """A criterion evaluation returned a non-finite value."""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"criterion returned non-finite value {value!r} at sample {index}")


class DegenerateVarianceError(MemorySimulationError, ValueError):
    """Total variance is too small for sensitivity indices to be defined."""


class UnsupportedParameterizationError(MemorySimulationError, TypeError):
    """The operation does not support this control parameterization."""


class SchemaError(MemorySimulationError, ValueError):
    """Result rows do not share one schema."""
