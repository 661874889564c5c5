"""Momentum level sets, the Routhian, and the reduced dynamics.

A regular level set N_mu = {p_a = mu_a} is parameterized by
(x, theta, v^i); the group quasi-velocities on it are the implicit
functions v^a = iota^a(x, theta, v^i), solved by Newton iteration with
Jacobian (g_ab).  The Routhian is R = L - v^a p_a, and on the level set
R^mu = L - mu_a v^a.  Because iota is defined by p = mu identically,
first derivatives of R^mu in any level-set coordinate equal the
corresponding frozen-velocity partials of L - mu_a v^a, while second
derivatives pick up implicit-function terms d iota / dy = -g^{ab} dp_b/dy.

The reduced dynamics on N_mu / G_mu couples a second-order equation for
x with a first-order equation for the G/G_mu coordinates:

    gbar_ij Gamma^j = cXbar_i(R^mu) - mu_a R^a_ij v^j - transport_i,
    thetadot^alpha  = iota^beta K^alpha_beta - v^i Lambda^alpha_i,

where transport_i carries the time derivative of dR^mu/dv^i along the
known first-order components of the flow.  All quantities are provably
independent of the gauge coordinates theta^A; the tests assert it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bundle import FullState, curvature
from .errors import DimensionError, DomainError, LevelSetError
from .integrate import Trajectory
from .lagrangian import (LagrangianSystem, _grad, _hess_vv, frame_context,
                         inv_regular, solve_regular)
from .lie import IsotropySplit

logger = logging.getLogger("routhkit")


@dataclass(frozen=True)
class MomentumLevel:
    """A momentum value mu in the system's working basis, together with
    the isotropy split of the algebra adapted to it."""

    mu: np.ndarray
    split: IsotropySplit
    solver_tol: float = 1e-12
    max_newton_iters: int = 30

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))

    @property
    def n_A(self) -> int:
        return self.split.n_A

    @property
    def n_alpha(self) -> int:
        return self.split.n_alpha


@dataclass(frozen=True)
class ReducedState:
    """Point of N_mu / G_mu: base coordinates, G/G_mu coordinates, and
    base quasi-velocities."""

    x: np.ndarray
    theta_alpha: np.ndarray
    v_base: np.ndarray

    def __post_init__(self):
        for name in ("x", "theta_alpha", "v_base"):
            object.__setattr__(
                self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            )
        if self.v_base.shape != self.x.shape:
            raise DimensionError("v_base must match x")

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x, self.theta_alpha, self.v_base])

    @staticmethod
    def unpack(flat: np.ndarray, n: int, n_alpha: int) -> "ReducedState":
        flat = np.asarray(flat, dtype=float)
        if flat.size != 2 * n + n_alpha:
            raise DimensionError(f"flat reduced state must have length {2 * n + n_alpha}")
        return ReducedState(flat[:n], flat[n:n + n_alpha], flat[n + n_alpha:])


@dataclass(frozen=True)
class BarredCoefficients:
    """Coefficients of the level-set-tangent frame fields.

    Stored with the group index first: B[a, i] = -g^{ab} g_ib,
    C[b, a] = g^{bc} C^d_ac p_d, and A[a, i] solving
    cX_i(p_a) + A^b_i g_ab = 0.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


def routhian(sys: LagrangianSystem, state: FullState) -> float:
    """R = L - v^a p_a at the given state."""
    _, _, _, p = _grad(sys, state.x, state.theta, state.v_base, state.v_group)
    val = sys.lagrangian(state.x, state.theta, state.v_base, state.v_group)
    return float(val - state.v_group @ p)


def solve_level_set(
    sys: LagrangianSystem,
    level: MomentumLevel,
    x: np.ndarray,
    theta: np.ndarray,
    v_base: np.ndarray,
    v_group_seed: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Solve p_a(x, theta, v^i, v^a) = mu_a for the group velocities.

    Newton iteration with Jacobian (g_ab), seeded at zero unless a warm
    start is supplied.  Exact in one step for velocity-quadratic
    Lagrangians.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    v_base = np.atleast_1d(np.asarray(v_base, dtype=float))
    mu = level.mu
    vg = np.zeros(sys.m) if v_group_seed is None else np.asarray(v_group_seed, dtype=float).copy()
    scale = max(1.0, float(np.max(np.abs(mu))))
    last_res = np.inf
    for it in range(level.max_newton_iters):
        _, _, _, p = _grad(sys, x, theta, v_base, vg)
        res = p - mu
        last_res = float(np.max(np.abs(res)))
        if last_res <= level.solver_tol * scale:
            return vg
        gab = _hess_vv(sys, x, theta, v_base, vg)[sys.n:, sys.n:]
        vg = vg - solve_regular(gab, res, "group Hessian block (g_ab)", sys.regularity_tol)
    raise LevelSetError(
        "momentum level-set Newton iteration did not converge",
        residual=last_res,
        iters=level.max_newton_iters,
    )


def barred_coefficients(sys: LagrangianSystem, state: FullState) -> BarredCoefficients:
    """A, B, C coefficients of the frame fields tangent to N_mu at the
    momentum value p(state)."""
    ctx = frame_context(sys, state.x, state.theta, state.v_base, state.v_group)
    n = sys.n
    gab = ctx.H[n:, n:]
    gia = ctx.H[:n, n:]
    ginv = inv_regular(gab, "group Hessian block (g_ab)", sys.regularity_tol)
    p = ctx.Lvg
    B = -(ginv @ gia.T)
    Cstr = sys.connection.group.algebra.structure_constants
    M = np.einsum("dac,d->ac", Cstr, p)
    Cco = ginv @ M.T
    cX_p = ctx.cX_P[:, n:]          # cX_i(p_a), indexed [i, a]
    A = -(ginv @ cX_p.T)
    return BarredCoefficients(A=A, B=B, C=Cco)


# ---------------------------------------------------------------------------
# reduced dynamics

def _reduced_core(sys: LagrangianSystem, level: MomentumLevel, x, th, vb, vg_seed=None):
    """Shared computation for the reduced field and reconstruction.

    Returns (iota, Gamma, thdot_full, H, grads) at the full point
    (x, th, vb, iota).  All reduced quantities are independent of the
    theta^A components of th.
    """
    n, m = sys.n, sys.m
    iota = solve_level_set(sys, level, x, th, vb, vg_seed)
    conn = sys.connection
    K = conn.group.fundamental_coeffs(th)
    lam = conn.coeffs(x, th)
    R = curvature(conn, x, th)
    Lx, Lth, Lvb, Lvg = _grad(sys, x, th, vb, iota)
    H = _hess_vv(sys, x, th, vb, iota)
    gij, gia, gab = H[:n, :n], H[:n, n:], H[n:, n:]
    gab_inv = inv_regular(gab, "group Hessian block (g_ab)", sys.regularity_tol)

    thdot_full = K @ iota - lam @ vb

    # transport terms: derivatives of f_i = dR^mu/dv^i as a level-set
    # function, via the implicit-function rule d iota/dy = -g^{ab} dp_b/dy
    h0 = sys.fd_first

    def df_along(vec, build):
        rows = np.empty((vec.size, n))
        for k in range(vec.size):
            h = h0 * (1.0 + abs(vec[k]))
            vp = vec.copy(); vp[k] += h
            vm = vec.copy(); vm[k] -= h
            _, _, Sb_p, Tg_p = _grad(sys, *build(vp))
            _, _, Sb_m, Tg_m = _grad(sys, *build(vm))
            S = (Sb_p - Sb_m) / (2 * h)
            T = (Tg_p - Tg_m) / (2 * h)
            rows[k] = S - gia @ (gab_inv @ T)
        return rows

    dfx = df_along(x, lambda v: (v, th, vb, iota))
    if sys.theta_independent:
        dfth = np.zeros((m, n))
    else:
        dfth = df_along(th, lambda v: (x, v, vb, iota))

    gbar = gij - gia @ gab_inv @ gia.T
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("gbar condition number %.3e at x=%s", np.linalg.cond(gbar), x)
    muR = np.tensordot(level.mu, R, axes=1)
    rhs = Lx - lam.T @ Lth - muR @ vb - vb @ dfx - thdot_full @ dfth
    Gamma = solve_regular(gbar, rhs, "reduced Hessian gbar", sys.regularity_tol)
    return iota, Gamma, thdot_full, H, (Lx, Lth, Lvb, Lvg)


def reduced_field(
    sys: LagrangianSystem,
    level: MomentumLevel,
    rstate: ReducedState,
    theta_A_gauge: Optional[np.ndarray] = None,
    v_group_seed: Optional[np.ndarray] = None,
) -> ReducedState:
    """Lagrange-Routh vector field on N_mu / G_mu.

    Returns a ReducedState whose components are the time derivatives of
    the input components.  The full state needed along the way is formed
    at the gauge value theta^A (chart identity by default); the result
    does not depend on that choice.
    """
    n_A = level.n_A
    gauge = (
        sys.chart.identity_coords[:n_A]
        if theta_A_gauge is None
        else np.atleast_1d(np.asarray(theta_A_gauge, dtype=float))
    )
    if gauge.size != n_A:
        raise DimensionError(f"theta_A_gauge must have length {n_A}")
    th = np.concatenate([gauge, rstate.theta_alpha])
    _, Gamma, thdot_full, _, _ = _reduced_core(
        sys, level, rstate.x, th, rstate.v_base, v_group_seed
    )
    return ReducedState(rstate.v_base.copy(), thdot_full[n_A:], Gamma)


def reduced_field_packed(sys: LagrangianSystem, level: MomentumLevel):
    """Flat-vector reduced field for the integrator, with warm-started
    level-set solves between evaluations (single-trajectory use)."""
    n, n_A = sys.n, level.n_A
    n_alpha = level.n_alpha
    gauge = sys.chart.identity_coords[:n_A]
    cache = {"vg": None}

    def rhs(t, y):
        x = y[:n]
        th = np.concatenate([gauge, y[n:n + n_alpha]])
        vb = y[n + n_alpha:]
        iota, Gamma, thdot_full, _, _ = _reduced_core(sys, level, x, th, vb, cache["vg"])
        cache["vg"] = iota
        return np.concatenate([vb, thdot_full[n_A:], Gamma])

    return rhs


def restricted_routhian(sys: LagrangianSystem, level: MomentumLevel, x, theta, v_base,
                        v_group_seed=None) -> float:
    """R^mu = L - mu_a v^a evaluated on the level set (v^a = iota^a)."""
    iota = solve_level_set(sys, level, x, theta, v_base, v_group_seed)
    val = sys.lagrangian(np.atleast_1d(np.asarray(x, float)),
                         np.atleast_1d(np.asarray(theta, float)),
                         np.atleast_1d(np.asarray(v_base, float)), iota)
    return float(val - level.mu @ iota)


# ---------------------------------------------------------------------------
# residual operators along trajectories

def _time_derivative(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Central differences on the grid; second-order one-sided ends."""
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (times[2:] - times[:-2])[:, None]
    h0 = times[1] - times[0]
    out[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * h0)
    h1 = times[-1] - times[-2]
    out[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * h1)
    return out


def generalized_routh_residual(
    sys: LagrangianSystem,
    level: MomentumLevel,
    traj: Trajectory,
    form: str = "primary",
    check_tol: float = 1e-7,
) -> np.ndarray:
    """Residual of the generalized Routh equations along a full trajectory.

    ``form="primary"`` evaluates
        Gamma(dR^mu/dv^i) - cXbar_i(R^mu) + mu_a R^a_ij v^j,
    with the time derivative taken by differencing along the sample.
    ``form="gamma0"`` evaluates the rearranged version in which the
    transport happens along cXhat_i = cXbar_i + B^a_i cEbar_a and the
    forcing picks up the B^b_i B^c_j C^a_bc correction.  Both vanish on
    Euler-Lagrange trajectories and agree identically.

    The trajectory must hold packed full states lying on N_mu to within
    ``check_tol``.
    """
    if form not in ("primary", "gamma0"):
        raise ValueError("form must be 'primary' or 'gamma0'")
    n, m = sys.n, sys.m
    mu = level.mu
    T = len(traj)
    if traj.states.shape[1] != 2 * (n + m):
        raise DimensionError("trajectory states must be packed full states")
    Cstr = sys.connection.group.algebra.structure_constants

    fvals = np.empty((T, n))
    spatial = np.empty((T, n))
    for k in range(T):
        st = FullState.unpack(traj.states[k], n, m)
        x, th, vb, vg = st.x, st.theta, st.v_base, st.v_group
        Lx, Lth, Lvb, p = _grad(sys, x, th, vb, vg)
        off = float(np.max(np.abs(p - mu)))
        if off > check_tol:
            raise DomainError(
                f"trajectory sample {k} is off the level set (|p - mu| = {off:.3e})"
            )
        fvals[k] = Lvb
        lam = sys.connection.coeffs(x, th)
        R = curvature(sys.connection, x, th)
        muR = np.tensordot(mu, R, axes=1)
        cXbar_R = Lx - lam.T @ Lth
        if form == "primary":
            spatial[k] = -cXbar_R + muR @ vb
        else:
            H = _hess_vv(sys, x, th, vb, vg)
            gia, gab = H[:n, n:], H[n:, n:]
            gab_inv = inv_regular(gab, "group Hessian block (g_ab)")
            B = -(gab_inv @ gia.T)
            K = sys.chart.fundamental_coeffs(th)
            # theta-derivatives of f_i as a level-set function
            h0 = sys.fd_first
            dfth = np.empty((m, n))
            for b in range(m):
                h = h0 * (1.0 + abs(th[b]))
                tp = th.copy(); tp[b] += h
                tm = th.copy(); tm[b] -= h
                _, _, Sp, Tp = _grad(sys, x, tp, vb, vg)
                _, _, Sm, Tm = _grad(sys, x, tm, vb, vg)
                dfth[b] = (Sp - Sm) / (2 * h) - gia @ (gab_inv @ ((Tp - Tm) / (2 * h)))
            w = B @ vb + vg
            transport = w @ (K.T @ dfth)
            cXhat_R = cXbar_R + B.T @ (K.T @ Lth)
            Q = np.tensordot(mu, Cstr, axes=1)
            forcing = muR @ vb + B.T @ Q @ (B @ vb)
            spatial[k] = -transport - cXhat_R + forcing
    return _time_derivative(fvals, traj.times) + spatial
