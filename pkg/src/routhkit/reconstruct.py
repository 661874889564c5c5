"""Reconstruction of full trajectories from reduced ones.

Two principal connections on the level set N_mu -> N_mu/G_mu are
supported.  Both share the vertical space spanned by the fundamental
fields of g_mu; they differ in the horizontal complement:

* Mechanical: horizontality means Hessian-orthogonality to the g_mu
  directions, so a curve's M-projected velocity satisfies
  g(E_A~, tau_* W) = 0.
* VerticalLift: the lift of the bundle connection, for which the
  cXbar_i directions are horizontal outright.

Reconstruction follows the standard three-step recipe: horizontally lift
the reduced curve, read off the g_mu-valued vertical part Phi of the
dynamics along the lift, develop Phi into G_mu, and act on the lift.
The lift, the development, and the reduced curve itself are integrated
as one augmented ODE so that a single fixed-step RK4 pass reconstructs
the trajectory deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .bundle import FullState
from .errors import DimensionError, DomainError, SpecError
from .integrate import Trajectory, rk4
from .lagrangian import (LagrangianSystem, _grad, _hess_vv, hessian,
                         inv_regular, solve_regular)
from .routh import MomentumLevel, _reduced_core, solve_level_set


class LevelConnectionKind(Enum):
    MECHANICAL = "mechanical"
    VERTICAL_LIFT = "vertical-lift"


@dataclass(frozen=True)
class UpsilonCoefficients:
    """Isotropy-block inverse and the mixing coefficients of the
    mechanical connection: Upsilon^B_alpha = G^{AB} g_{A alpha} and
    Upsilon^B_i = G^{AB} g_{A i}."""

    G_AB_inv: np.ndarray
    upsilon_alpha: np.ndarray
    upsilon_base: np.ndarray


@dataclass(frozen=True)
class VerticalPart:
    """g_mu component of the dynamics at a level-set point, plus the
    G/G_mu velocity coefficients Psi^alpha = Abar^alpha_beta iota^beta."""

    phi_A: np.ndarray
    psi_alpha: np.ndarray
    abar: np.ndarray
    kind: LevelConnectionKind


@dataclass(frozen=True)
class ReconstructionResult:
    """Full trajectory on N_mu (packed full states), the developed group
    curve in G_mu (full chart coordinates), and the horizontal lift."""

    trajectory: Trajectory
    group_curve: Trajectory
    lift: Trajectory


def _isotropy_blocks(sys: LagrangianSystem, level: MomentumLevel, H: np.ndarray):
    n, n_A = sys.n, level.n_A
    gab = H[n:, n:]
    g_AB = gab[:n_A, :n_A]
    g_Aalpha = gab[:n_A, n_A:]
    g_Ai = H[:n, n:n + n_A].T
    G = inv_regular(g_AB, "isotropy Hessian block (g_AB)", sys.regularity_tol)
    return G, G @ g_Aalpha, G @ g_Ai


def upsilon(sys: LagrangianSystem, level: MomentumLevel, state: FullState) -> UpsilonCoefficients:
    """Mechanical-connection coefficients in the adapted basis."""
    H = hessian(sys, state).full
    G, ua, ui = _isotropy_blocks(sys, level, H)
    return UpsilonCoefficients(G, ua, ui)


def _check_on_level(sys, level, state, tol=1e-7):
    _, _, _, p = _grad(sys, state.x, state.theta, state.v_base, state.v_group)
    off = float(np.max(np.abs(p - level.mu)))
    if off > tol:
        raise DomainError(f"state is off the momentum level set (|p - mu| = {off:.3e})")


def vertical_part(
    sys: LagrangianSystem,
    level: MomentumLevel,
    state: FullState,
    kind: LevelConnectionKind,
) -> VerticalPart:
    """Vertical component of the dynamics at an on-level state.

    Phi^A = iota^A + Upsilon^A_alpha iota^alpha, plus
    Upsilon^A_i v^i for the mechanical connection.
    """
    _check_on_level(sys, level, state)
    n_A = level.n_A
    iota = state.v_group
    H = _hess_vv(sys, state.x, state.theta, state.v_base, state.v_group)
    _, ua, ui = _isotropy_blocks(sys, level, H)
    phi = iota[:n_A] + ua @ iota[n_A:]
    if kind is LevelConnectionKind.MECHANICAL:
        phi = phi + ui @ state.v_base
    A = sys.chart.adjoint(state.theta)
    A_alpha = A[n_A:, n_A:]
    abar = inv_regular(A_alpha, "adjoint alpha-block")
    return VerticalPart(phi, abar @ iota[n_A:], abar, kind)


# ---------------------------------------------------------------------------
# augmented integration: reduced curve + horizontal lift (+ development)

def _augmented_field(sys, level, kind, phi_rule, with_development):
    """RHS of the augmented ODE on
    [x, theta^alpha, v_base, theta^A_lift(, theta^A_dev)].

    ``phi_rule(iota, ua, ui, vb, G)`` supplies the g_mu curve to develop
    (the connection's vertical part, or the locked-inertia rule).
    The closure warm-starts the level-set Newton solve between calls, so
    one instance serves one trajectory at a time.
    """
    n, n_A = sys.n, level.n_A
    n_alpha = level.n_alpha
    chart = sys.chart
    id_alpha = chart.identity_coords[n_A:]
    mech = kind is LevelConnectionKind.MECHANICAL
    cache = {"vg": None}

    def rhs(t, y):
        x = y[:n]
        th_alpha = y[n:n + n_alpha]
        vb = y[n + n_alpha:2 * n + n_alpha]
        thA = y[2 * n + n_alpha:2 * n + n_alpha + n_A]
        th = np.concatenate([thA, th_alpha])
        iota, Gamma, thdot_full, H, _ = _reduced_core(sys, level, x, th, vb, cache["vg"])
        cache["vg"] = iota
        G, ua, ui = _isotropy_blocks(sys, level, H)
        K = chart.fundamental_coeffs(th)
        lam = sys.connection.coeffs(x, th)
        lam_hat = lam + K[:, :n_A] @ ui if mech else lam
        Hh = K[:, n_A:] - K[:, :n_A] @ ua
        d = solve_regular(Hh[n_A:, :], thdot_full[n_A:] + lam_hat[n_A:, :] @ vb,
                          "horizontal frame along the lift") if n_alpha else np.zeros(0)
        thA_dot = -lam_hat[:n_A, :] @ vb + Hh[:n_A, :] @ d
        parts = [vb, thdot_full[n_A:], Gamma, thA_dot]
        if with_development:
            thA_dev = y[2 * n + n_alpha + n_A:]
            phi = phi_rule(iota, ua, ui, vb, G)
            K_dev = chart.fundamental_coeffs(np.concatenate([thA_dev, id_alpha]))
            parts.append(K_dev[:n_A, :n_A] @ phi)
        return np.concatenate(parts)

    return rhs


def _connection_phi(kind):
    mech = kind is LevelConnectionKind.MECHANICAL

    def phi_rule(iota, ua, ui, vb, G):
        n_A = ua.shape[0]
        phi = iota[:n_A] + ua @ iota[n_A:]
        if mech:
            phi = phi + ui @ vb
        return phi

    return phi_rule


def _reduced_parts(reduced_traj: Trajectory, n: int, n_alpha: int):
    if reduced_traj.states.shape[1] != 2 * n + n_alpha:
        raise DimensionError("reduced trajectory has the wrong state width")
    t = reduced_traj.times
    dt = float(np.min(np.diff(t)))
    return t, dt


def _lift_states(sys, level, aug: Trajectory):
    """Full on-level states along the lift part of an augmented run."""
    n, n_A, n_alpha = sys.n, level.n_A, level.n_alpha
    T = len(aug)
    out = np.empty((T, 2 * (n + sys.m)))
    vg = None
    for k in range(T):
        y = aug.states[k]
        x = y[:n]
        th = np.concatenate([y[2 * n + n_alpha:2 * n + n_alpha + n_A], y[n:n + n_alpha]])
        vb = y[n + n_alpha:2 * n + n_alpha]
        vg = solve_level_set(sys, level, x, th, vb, vg)
        out[k] = FullState(x, th, vb, vg).pack()
    return Trajectory(aug.times.copy(), out)


def horizontal_lift(
    sys: LagrangianSystem,
    level: MomentumLevel,
    reduced_traj: Trajectory,
    lift_seed_theta_A: np.ndarray,
    kind: LevelConnectionKind,
) -> Trajectory:
    """Horizontal lift of a reduced integral curve through the given
    theta^A seed, as a trajectory of packed full states on N_mu.

    The reduced curve is re-integrated together with the lift ODE on the
    same grid, so the projection of the lift reproduces the input curve
    to integrator accuracy.
    """
    n, n_alpha, n_A = sys.n, level.n_alpha, level.n_A
    t, dt = _reduced_parts(reduced_traj, n, n_alpha)
    seed = np.atleast_1d(np.asarray(lift_seed_theta_A, dtype=float))
    if seed.size != n_A:
        raise DimensionError(f"lift seed must have length {n_A}")
    y0 = np.concatenate([reduced_traj.states[0], seed])
    rhs = _augmented_field(sys, level, kind, _connection_phi(kind), with_development=False)
    aug = rk4(rhs, y0, float(t[0]), float(t[-1]), dt)
    return _lift_states(sys, level, aug)


def _run_reconstruction(sys, level, reduced_traj, kind, phi_rule, g0, lift_seed_theta_A):
    n, n_alpha, n_A = sys.n, level.n_alpha, level.n_A
    m = sys.m
    chart = sys.chart
    t, dt = _reduced_parts(reduced_traj, n, n_alpha)
    seed = (
        chart.identity_coords[:n_A]
        if lift_seed_theta_A is None
        else np.atleast_1d(np.asarray(lift_seed_theta_A, dtype=float))
    )
    if g0 is None:
        dev0 = chart.identity_coords[:n_A]
    else:
        g0 = np.atleast_1d(np.asarray(g0, dtype=float))
        if g0.size == n_A:
            dev0 = g0
        elif g0.size == m:
            if np.max(np.abs(g0[n_A:] - chart.identity_coords[n_A:])) > 1e-12:
                raise SpecError("g0 must lie in G_mu (theta^alpha at identity)")
            dev0 = g0[:n_A]
        else:
            raise DimensionError("g0 must be a G_mu chart point")
    y0 = np.concatenate([reduced_traj.states[0], seed, dev0])
    rhs = _augmented_field(sys, level, kind, phi_rule, with_development=True)
    aug = rk4(rhs, y0, float(t[0]), float(t[-1]), dt)

    id_alpha = chart.identity_coords[n_A:]
    T = len(aug)
    full = np.empty((T, 2 * (n + m)))
    group = np.empty((T, m))
    vg = None
    for k in range(T):
        y = aug.states[k]
        x = y[:n]
        th_alpha = y[n:n + n_alpha]
        vb = y[n + n_alpha:2 * n + n_alpha]
        thA_lift = y[2 * n + n_alpha:2 * n + n_alpha + n_A]
        thA_dev = y[2 * n + n_alpha + n_A:]
        g_dev = np.concatenate([thA_dev, id_alpha])
        th_lift = np.concatenate([thA_lift, th_alpha])
        th_rec = chart.multiply(g_dev, th_lift)
        vg = solve_level_set(sys, level, x, th_rec, vb, vg)
        full[k] = FullState(x, th_rec, vb, vg).pack()
        group[k] = g_dev
    lift = _lift_states(sys, level, Trajectory(aug.times.copy(), aug.states[:, : 2 * n + n_alpha + n_A]))
    return ReconstructionResult(
        trajectory=Trajectory(aug.times.copy(), full),
        group_curve=Trajectory(aug.times.copy(), group),
        lift=lift,
    )


def reconstruct(
    sys: LagrangianSystem,
    level: MomentumLevel,
    reduced_traj: Trajectory,
    kind: LevelConnectionKind,
    g0: Optional[np.ndarray] = None,
    lift_seed_theta_A: Optional[np.ndarray] = None,
) -> ReconstructionResult:
    """Reconstruct a full Euler-Lagrange trajectory from a reduced one.

    Horizontally lifts the reduced curve (with respect to the chosen
    connection), develops the vertical part of the dynamics along the
    lift into G_mu starting at g0 (identity by default), and acts on
    the lift by the G_mu action.
    """
    return _run_reconstruction(
        sys, level, reduced_traj, kind, _connection_phi(kind), g0, lift_seed_theta_A
    )


def locked_inertia_reconstruction(
    sys: LagrangianSystem,
    level: MomentumLevel,
    reduced_traj: Trajectory,
    g0: Optional[np.ndarray] = None,
    lift_seed_theta_A: Optional[np.ndarray] = None,
) -> ReconstructionResult:
    """Simple-mechanical reconstruction via the locked inertia tensor.

    The developed curve is xi(t) = I_mu^{-1}(j* mu), with I_mu the
    isotropy block of the locked inertia tensor along the lift's base
    projection.  Agrees with the generic mechanical-connection
    reconstruction for simple mechanical systems.
    """
    if not sys.simple_mechanical:
        raise SpecError("locked-inertia reconstruction requires a simple mechanical system")
    mu_A = level.mu[: level.n_A]

    def phi_rule(iota, ua, ui, vb, G):
        return G @ mu_A

    return _run_reconstruction(
        sys, level, reduced_traj, LevelConnectionKind.MECHANICAL, phi_rule, g0,
        lift_seed_theta_A,
    )
