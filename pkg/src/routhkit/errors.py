"""Exception hierarchy for routhkit.

Numerical failures carry enough context (condition numbers, exit times,
partial trajectories) for a caller to diagnose them without re-running.
"""

from __future__ import annotations


class RouthkitError(Exception):
    """Base class for all routhkit errors."""


class DimensionError(RouthkitError, ValueError):
    """An argument has the wrong length or shape."""


class SpecError(RouthkitError, ValueError):
    """A system definition or config is invalid (non-symmetric metric,
    violated algebraic condition, unknown name, unparseable file)."""


class ChartError(RouthkitError):
    """A group-chart evaluation failed: singular frame matrix K, or a
    point outside the chart domain."""


class RegularityError(RouthkitError):
    """A Hessian block that the theory requires to be invertible is
    singular (or numerically so)."""

    def __init__(self, message: str, cond: float | None = None):
        if cond is not None:
            message = f"{message} (condition number {cond:.3e})"
        super().__init__(message)
        self.cond = cond


class LevelSetError(RouthkitError):
    """Newton iteration for the momentum level set failed to converge."""

    def __init__(self, message: str, residual: float | None = None, iters: int | None = None):
        if residual is not None:
            message = f"{message} (residual {residual:.3e} after {iters} iterations)"
        super().__init__(message)
        self.residual = residual
        self.iters = iters


class DomainError(RouthkitError):
    """A state violates a required constraint, e.g. it is off the
    momentum level set beyond tolerance."""


class IntegrationError(RouthkitError):
    """A trajectory integration aborted.  Carries the partial trajectory
    computed so far and the time at which the field evaluation failed."""

    def __init__(self, message: str, t_exit: float | None = None, partial=None, cause=None):
        if t_exit is not None:
            message = f"{message} (at t = {t_exit:.6g})"
        super().__init__(message)
        self.t_exit = t_exit
        self.partial = partial
        self.cause = cause
