"""Fixed-step explicit ODE integration and trajectory containers.

Only classical RK4 is provided: the systems treated here are non-stiff,
and a fixed deterministic step keeps oracle comparisons bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from .errors import IntegrationError

Field = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class Trajectory:
    """Time grid, per-time state vectors, and named per-time diagnostics.

    ``states[k]`` is the (flat) state at ``times[k]``.  Diagnostics are
    arrays aligned with ``times`` (momentum error, energy, condition
    numbers, ...), attached after integration.
    """

    times: np.ndarray
    states: np.ndarray
    diagnostics: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states length must match times length")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def column(self, index: int) -> np.ndarray:
        return self.states[:, index]


def _time_grid(t0: float, tf: float, dt: float) -> np.ndarray:
    """Grid t0, t0+dt, ...; the last step is shortened to land on tf."""
    n_full = int(np.floor((tf - t0) / dt + 1e-12))
    grid = t0 + dt * np.arange(n_full + 1)
    if grid[-1] < tf - 1e-12 * max(1.0, abs(tf)):
        grid = np.append(grid, tf)
    else:
        grid[-1] = tf
    return grid


def rk4(field: Field, state0: np.ndarray, t0: float, tf: float, dt: float) -> Trajectory:
    """Integrate ``y' = field(t, y)`` with classical 4th-order Runge-Kutta.

    The step is fixed at ``dt`` except for the final step, which is
    shortened so the grid lands on ``tf`` exactly.  A failing field
    evaluation raises IntegrationError carrying the partial trajectory
    and the exit time.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if tf <= t0:
        raise ValueError("tf must exceed t0")
    y = np.asarray(state0, dtype=float).copy()
    times = _time_grid(t0, tf, dt)
    out = np.empty((len(times), y.size))
    out[0] = y
    for k in range(len(times) - 1):
        t = times[k]
        h = times[k + 1] - t
        try:
            k1 = field(t, y)
            k2 = field(t + 0.5 * h, y + (0.5 * h) * k1)
            k3 = field(t + 0.5 * h, y + (0.5 * h) * k2)
            k4 = field(t + h, y + h * k3)
        except Exception as exc:
            partial = Trajectory(times[: k + 1], out[: k + 1].copy())
            raise IntegrationError(
                f"field evaluation failed: {exc}", t_exit=t, partial=partial, cause=exc
            ) from exc
        y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if not np.all(np.isfinite(y)):
            partial = Trajectory(times[: k + 1], out[: k + 1].copy())
            raise IntegrationError(
                "state became non-finite", t_exit=times[k + 1], partial=partial
            )
        out[k + 1] = y
    return Trajectory(times, out)
