"""End-to-end runs: full simulation, reduction, reconstruction, and the
two-pipeline comparison.  The CLI wraps these; tests call them directly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bundle import FullState
from .errors import DomainError
from .integrate import Trajectory, rk4
from .lagrangian import (LagrangianSystem, _grad, _hess_vv, el_field_packed, energy,
                         momentum)
from .reconstruct import LevelConnectionKind, reconstruct
from .routh import MomentumLevel, ReducedState, reduced_field_packed

logger = logging.getLogger("routhkit")


def attach_full_diagnostics(sys: LagrangianSystem, traj: Trajectory,
                            mu: Optional[np.ndarray] = None) -> Trajectory:
    """Momentum error per component, energy, and Hessian condition number
    along a full trajectory (in place; returns the trajectory)."""
    n, m = sys.n, sys.m
    T = len(traj)
    perr = np.empty((T, m))
    en = np.empty(T)
    cond = np.empty(T)
    ref = mu
    for k in range(T):
        st = FullState.unpack(traj.states[k], n, m)
        _, _, Lvb, Lvg = _grad(sys, st.x, st.theta, st.v_base, st.v_group)
        if ref is None:
            ref = Lvg.copy()
        perr[k] = Lvg - ref
        en[k] = st.v_base @ Lvb + st.v_group @ Lvg - sys.lagrangian(st.x, st.theta, st.v_base, st.v_group)
        cond[k] = np.linalg.cond(_hess_vv(sys, st.x, st.theta, st.v_base, st.v_group))
    for a in range(m):
        traj.diagnostics[f"p_err_{a + 1}"] = perr[:, a]
    traj.diagnostics["energy"] = en
    traj.diagnostics["hessian_cond"] = cond
    return traj


def simulate_full(sys: LagrangianSystem, state0: FullState, t0: float, tf: float,
                  dt: float, mu: Optional[np.ndarray] = None,
                  diagnostics: bool = True) -> Trajectory:
    """Integrate the Euler-Lagrange field from a full state."""
    traj = rk4(el_field_packed(sys), state0.pack(), t0, tf, dt)
    if diagnostics:
        attach_full_diagnostics(sys, traj, mu)
    _audit_angle(sys, traj)
    return traj


def _audit_angle(sys: LagrangianSystem, traj: Trajectory):
    """Built-in SE(2) charts keep the angle unwrapped; warn when it
    leaves (-pi, pi]."""
    labels = sys.group_labels
    if "theta" in labels:
        col = sys.n + labels.index("theta")
        worst = float(np.max(np.abs(traj.states[:, col])))
        if worst > np.pi:
            logger.warning("angle coordinate left (-pi, pi] (max |theta| = %.3f); "
                           "chart is unwrapped by design", worst)


def integrate_reduced(sys: LagrangianSystem, level: MomentumLevel, rstate0: ReducedState,
                      t0: float, tf: float, dt: float) -> Trajectory:
    """Integrate the Lagrange-Routh field from a reduced state."""
    return rk4(reduced_field_packed(sys, level), rstate0.pack(), t0, tf, dt)


def reduce_full_state(level: MomentumLevel, state: FullState) -> ReducedState:
    return ReducedState(state.x, state.theta[level.n_A:], state.v_base)


def check_on_level(sys: LagrangianSystem, level: MomentumLevel, state: FullState,
                   tol: float = 1e-9) -> float:
    off = float(np.max(np.abs(momentum(sys, state) - level.mu)))
    if off > tol:
        raise DomainError(f"initial momentum mismatch: |p - mu| = {off:.3e} > {tol:.1e}")
    return off


@dataclass
class CompareReport:
    """Outcome of the full-vs-(reduce+reconstruct) comparison."""

    max_discrepancy: float
    momentum_drift: float
    el_residual: float
    tolerance: float
    passed: bool
    kind: str

    def as_dict(self) -> dict:
        return {
            "max_discrepancy": self.max_discrepancy,
            "momentum_drift": self.momentum_drift,
            "el_residual": self.el_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "connection": self.kind,
        }


def el_residual_along(sys: LagrangianSystem, traj: Trajectory, stride: int = 50) -> float:
    """Max Euler-Lagrange residual along a trajectory: compares the
    differenced fiber gradient with its flow value from the assembled
    field.  Independent of how the trajectory was produced."""
    from .lagrangian import frame_context
    n, m = sys.n, sys.m
    worst = 0.0
    for k in range(1, len(traj) - 1, stride):
        hm = traj.times[k] - traj.times[k - 1]
        hp = traj.times[k + 1] - traj.times[k]
        sts = [FullState.unpack(traj.states[j], n, m) for j in (k - 1, k, k + 1)]
        grads = [_grad(sys, s.x, s.theta, s.v_base, s.v_group) for s in sts]
        P = [np.concatenate([g[2], g[3]]) for g in grads]
        dPdt = (P[2] - P[0]) / (hm + hp)
        ctx = frame_context(sys, sts[1].x, sts[1].theta, sts[1].v_base, sts[1].v_group)
        # EL in frame form: Gamma(P_alpha) = cZ_alpha(L), with Gamma(P)
        # the total time derivative along the flow
        cZ_L = np.concatenate([ctx.cX_L, ctx.cE_L])
        worst = max(worst, float(np.max(np.abs(dPdt - cZ_L))))
    return worst


def compare_pipelines(
    sys: LagrangianSystem,
    level: MomentumLevel,
    state0: FullState,
    t0: float,
    tf: float,
    dt: float,
    kind: LevelConnectionKind = LevelConnectionKind.MECHANICAL,
    tolerance: float = 1e-6,
    ic_tol: float = 1e-9,
) -> CompareReport:
    """Run direct integration and reduce+reconstruct from the same
    on-level initial state and compare."""
    check_on_level(sys, level, state0, ic_tol)
    full = simulate_full(sys, state0, t0, tf, dt, mu=level.mu, diagnostics=False)
    rtraj = integrate_reduced(sys, level, reduce_full_state(level, state0), t0, tf, dt)
    rec = reconstruct(sys, level, rtraj, kind, lift_seed_theta_A=state0.theta[: level.n_A])
    disc = float(np.max(np.abs(full.states - rec.trajectory.states)))
    drift = 0.0
    for k in (0, len(full) // 2, len(full) - 1):
        st = FullState.unpack(full.states[k], sys.n, sys.m)
        drift = max(drift, float(np.max(np.abs(momentum(sys, st) - level.mu))))
    resid = el_residual_along(sys, rec.trajectory)
    return CompareReport(
        max_discrepancy=disc,
        momentum_drift=drift,
        el_residual=resid,
        tolerance=tolerance,
        passed=disc <= tolerance,
        kind=kind.value,
    )
