"""Regular Lagrangian systems in quasi-velocities.

A Lagrangian is a function L(x, theta, v_base, v_group) of bundle
coordinates and frame velocity components.  The Euler-Lagrange field is
assembled directly in the frame {X_i, Ea~} from the derivative table of
the quasi-velocities,

    cX_i(v^a) = -R^a_ij v^j,      cEa~(v^b) = C^b_ac v^c,

so curvature and structure-constant corrections enter the equations
explicitly instead of through coordinate second derivatives.  Writing
P_alpha = dL/dv^alpha, the fiber accelerations solve

    H . vdot = cZ_alpha(L) - v^beta cZ_beta(P_alpha),

with H the velocity Hessian and cZ the complete lifts of the frame
fields acting on functions of (x, theta, v).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .bundle import BundleConnection, FullState, curvature
from .errors import RegularityError, RouthkitError

FD_FIRST = 1e-5
FD_SECOND = 1e-4


@dataclass(frozen=True)
class LagrangianSystem:
    """Bundle connection plus an invariant Lagrangian in quasi-velocities.

    Optional analytic hooks (all preferred over finite differences when
    present):

    * ``grad(x, th, vb, vg) -> (Lx, Lth, Lvb, Lvg)``: first derivatives;
    * ``hess_vv(...) -> (n+m, n+m)``: velocity Hessian, base block first;
    * ``hess_yv(...) -> (Px, Pth)``: coordinate derivatives of the fiber
      gradient P = (Lvb, Lvg), with Px[j, alpha] = dP_alpha/dx^j and
      Pth[b, alpha] = dP_alpha/dtheta^b.

    ``theta_independent`` marks Lagrangians whose quasi-velocity form has
    no explicit theta dependence (all group dependence sits in the frame),
    which lets derivative loops skip the theta directions.
    """

    connection: BundleConnection
    lagrangian: Callable
    grad: Optional[Callable] = None
    hess_vv: Optional[Callable] = None
    hess_yv: Optional[Callable] = None
    theta_independent: bool = False
    simple_mechanical: bool = False
    regularity_tol: float = 1e-8
    fd_first: float = FD_FIRST
    fd_second: float = FD_SECOND
    base_labels: Sequence[str] = ()
    group_labels: Sequence[str] = ()
    name: str = ""

    @property
    def n(self) -> int:
        return self.connection.base_dim

    @property
    def m(self) -> int:
        return self.connection.group.dim

    @property
    def chart(self):
        return self.connection.group


@dataclass(frozen=True)
class HessianBlocks:
    """Velocity Hessian of L split into frame blocks (base index first)."""

    full: np.ndarray
    n: int

    @property
    def g_ij(self) -> np.ndarray:
        return self.full[: self.n, : self.n]

    @property
    def g_ia(self) -> np.ndarray:
        return self.full[: self.n, self.n:]

    @property
    def g_ab(self) -> np.ndarray:
        return self.full[self.n:, self.n:]

    def group_inverse(self) -> np.ndarray:
        """g^{ab}; RegularityError if the group block is singular."""
        return inv_regular(self.g_ab, "group Hessian block (g_ab)")

    def reduced_base(self) -> np.ndarray:
        """gbar_ij = g_ij - g^{ab} g_ia g_jb (restriction of the Hessian
        to the g-orthogonal complement of the fundamental directions)."""
        gia = self.g_ia
        return self.g_ij - gia @ self.group_inverse() @ gia.T

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.full - self.full.T)))


def _safe_cond(mat: np.ndarray) -> float:
    try:
        return float(np.linalg.cond(mat))
    except np.linalg.LinAlgError:
        return float("inf")


def solve_regular(mat: np.ndarray, rhs: np.ndarray, what: str, tol: float = 1e-8) -> np.ndarray:
    """Solve mat x = rhs, treating near-singularity as a hard error.

    ``tol`` bounds the acceptable singular-value ratio s_min/s_max; the
    default matches the noise floor of finite-difference Hessians.
    Regularity failures are never silently regularized (no pseudoinverse
    fallback), per the standing assumptions of the theory.
    """
    k = mat.shape[0]
    if k == 0:
        return np.zeros_like(rhs)
    # cheap screen: Hadamard-normalized determinant; rank deficiency by
    # row cancellation drives it to zero.  Suspicious values get an SVD
    # verdict (rare on regular systems).
    det = float(np.linalg.det(mat))
    row_prod = float(np.prod(np.sqrt((mat * mat).sum(axis=1))))
    if not abs(det) > 100.0 * tol * row_prod:
        svals = np.linalg.svd(mat, compute_uv=False)
        if svals[0] <= 0.0 or svals[-1] <= tol * svals[0]:
            raise RegularityError(f"{what} is singular", cond=_safe_cond(mat))
    try:
        return np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise RegularityError(f"{what} is singular", cond=_safe_cond(mat)) from exc


def inv_regular(mat: np.ndarray, what: str, tol: float = 1e-8) -> np.ndarray:
    return solve_regular(mat, np.eye(mat.shape[0]), what, tol)


# ---------------------------------------------------------------------------
# derivative evaluation (analytic hooks with finite-difference fallbacks)

def _grad(sys: LagrangianSystem, x, th, vb, vg):
    if sys.grad is not None:
        return sys.grad(x, th, vb, vg)
    L = sys.lagrangian
    h0 = sys.fd_first

    def diff(vec, build):
        out = np.empty(vec.size)
        for k in range(vec.size):
            h = h0 * (1.0 + abs(vec[k]))
            vp = vec.copy(); vp[k] += h
            vm = vec.copy(); vm[k] -= h
            out[k] = (L(*build(vp)) - L(*build(vm))) / (2 * h)
        return out

    Lx = diff(x, lambda v: (v, th, vb, vg))
    if sys.theta_independent:
        Lth = np.zeros(th.size)
    else:
        Lth = diff(th, lambda v: (x, v, vb, vg))
    Lvb = diff(vb, lambda v: (x, th, v, vg))
    Lvg = diff(vg, lambda v: (x, th, vb, v))
    return Lx, Lth, Lvb, Lvg


def _hess_vv(sys: LagrangianSystem, x, th, vb, vg) -> np.ndarray:
    n, m = sys.n, sys.m
    if sys.hess_vv is not None:
        return sys.hess_vv(x, th, vb, vg)
    if sys.grad is not None:
        # first-order FD of the analytic fiber gradient
        H = np.empty((n + m, n + m))
        h0 = sys.fd_first
        v = np.concatenate([vb, vg])
        for k in range(n + m):
            h = h0 * (1.0 + abs(v[k]))
            vp = v.copy(); vp[k] += h
            vm = v.copy(); vm[k] -= h
            _, _, pb, pg = sys.grad(x, th, vp[:n], vp[n:])
            _, _, qb, qg = sys.grad(x, th, vm[:n], vm[n:])
            H[k] = (np.concatenate([pb, pg]) - np.concatenate([qb, qg])) / (2 * h)
        return 0.5 * (H + H.T)
    # second-order FD of L itself
    L = sys.lagrangian
    h0 = sys.fd_second
    v = np.concatenate([vb, vg])

    def ev(w):
        return L(x, th, w[:n], w[n:])

    f0 = ev(v)
    H = np.empty((n + m, n + m))
    steps = h0 * (1.0 + np.abs(v))
    for i in range(n + m):
        ei = np.zeros(n + m); ei[i] = steps[i]
        H[i, i] = (ev(v + 2 * ei) - 2 * f0 + ev(v - 2 * ei)) / (4 * steps[i] ** 2)
        for j in range(i + 1, n + m):
            ej = np.zeros(n + m); ej[j] = steps[j]
            val = (ev(v + ei + ej) - ev(v + ei - ej) - ev(v - ei + ej) + ev(v - ei - ej))
            H[i, j] = H[j, i] = val / (4 * steps[i] * steps[j])
    return H


def _mixed_yv(sys: LagrangianSystem, x, th, vb, vg):
    """(Px, Pth): coordinate partials of the fiber gradient P."""
    n, m = sys.n, sys.m
    if sys.hess_yv is not None:
        return sys.hess_yv(x, th, vb, vg)
    h0 = sys.fd_first

    def p_at(xx, tt):
        _, _, pb, pg = _grad(sys, xx, tt, vb, vg)
        return np.concatenate([pb, pg])

    Px = np.empty((n, n + m))
    for j in range(n):
        h = h0 * (1.0 + abs(x[j]))
        xp = x.copy(); xp[j] += h
        xm = x.copy(); xm[j] -= h
        Px[j] = (p_at(xp, th) - p_at(xm, th)) / (2 * h)
    if sys.theta_independent:
        Pth = np.zeros((m, n + m))
    else:
        Pth = np.empty((m, n + m))
        for b in range(m):
            h = h0 * (1.0 + abs(th[b]))
            tp = th.copy(); tp[b] += h
            tm = th.copy(); tm[b] -= h
            Pth[b] = (p_at(x, tp) - p_at(x, tm)) / (2 * h)
    return Px, Pth


# ---------------------------------------------------------------------------
# public operations

def hessian(sys: LagrangianSystem, state: FullState) -> HessianBlocks:
    """Velocity Hessian blocks of L at a state."""
    H = _hess_vv(sys, state.x, state.theta, state.v_base, state.v_group)
    if not np.all(np.isfinite(H)):
        raise RouthkitError("Hessian evaluation produced non-finite values")
    return HessianBlocks(H, sys.n)


def momentum(sys: LagrangianSystem, state: FullState) -> np.ndarray:
    """Momentum p_a = dL/dv^a (fiber derivative along the fundamental
    directions); conserved along the Euler-Lagrange flow."""
    _, _, _, Lvg = _grad(sys, state.x, state.theta, state.v_base, state.v_group)
    return np.asarray(Lvg, dtype=float)


def energy(sys: LagrangianSystem, state: FullState) -> float:
    """E = v^alpha dL/dv^alpha - L."""
    _, _, Lvb, Lvg = _grad(sys, state.x, state.theta, state.v_base, state.v_group)
    val = sys.lagrangian(state.x, state.theta, state.v_base, state.v_group)
    return float(state.v_base @ Lvb + state.v_group @ Lvg - val)


def _el_field_arrays(sys: LagrangianSystem, x, th, vb, vg):
    n = sys.n
    conn = sys.connection
    K = conn.group.fundamental_coeffs(th)
    lam = conn.coeffs(x, th)
    R = curvature(conn, x, th)
    Lx, Lth, Lvb, Lvg = _grad(sys, x, th, vb, vg)
    H = _hess_vv(sys, x, th, vb, vg)
    Px, Pth = _mixed_yv(sys, x, th, vb, vg)

    Cv = conn.group.algebra.structure_constants @ vg   # Cv[b, a] = C^b_ac v^c
    Hg = H[:, n:]                                 # dP_alpha/dv^a

    cX_L = Lx - lam.T @ Lth
    cE_L = K.T @ Lth + Cv.T @ Lvg
    cX_P = Px - lam.T @ Pth
    cE_P = K.T @ Pth + Cv.T @ Hg.T
    if R.any():
        Rv = R @ vb                               # Rv[a, i] = R^a_ij v^j
        cX_L = cX_L - Rv.T @ Lvg
        cX_P = cX_P - Rv.T @ Hg.T

    rhs = np.concatenate([cX_L, cE_L]) - vb @ cX_P - vg @ cE_P
    acc = solve_regular(H, rhs, "velocity Hessian", sys.regularity_tol)
    thdot = K @ vg - lam @ vb
    return vb, thdot, acc[:n], acc[n:]


def el_field(sys: LagrangianSystem, state: FullState) -> FullState:
    """Euler-Lagrange field at a state.

    Returns a FullState whose components are the time derivatives
    (xdot, thetadot, vdot_base, vdot_group) of the input components.
    """
    xdot, thdot, ab, ag = _el_field_arrays(
        sys, state.x, state.theta, state.v_base, state.v_group
    )
    return FullState(xdot, thdot, ab, ag)


def el_field_packed(sys: LagrangianSystem) -> Callable[[float, np.ndarray], np.ndarray]:
    """Flat-vector wrapper of the EL field for the integrator."""
    n, m = sys.n, sys.m

    def rhs(t, y):
        xdot, thdot, ab, ag = _el_field_arrays(
            sys, y[:n], y[n:n + m], y[n + m:2 * n + m], y[2 * n + m:]
        )
        return np.concatenate([xdot, thdot, ab, ag])

    return rhs


def coordinate_accelerations(sys: LagrangianSystem, state: FullState, deriv: FullState):
    """(xddot, thetaddot) implied by a state and its EL derivative.

    Differentiates thetadot = K v_group - Lambda v_base along the flow;
    used to compare frames, since coordinate accelerations are
    frame-independent.
    """
    h = 1e-6

    def thdot_at(eps):
        th = state.theta + eps * deriv.theta
        x = state.x + eps * state.v_base
        vg = state.v_group + eps * deriv.v_group
        vbv = state.v_base + eps * deriv.v_base
        K = sys.connection.group.fundamental_coeffs(th)
        lam = sys.connection.coeffs(x, th)
        return K @ vg - lam @ vbv

    thddot = (thdot_at(h) - thdot_at(-h)) / (2 * h)
    return deriv.v_base.copy(), thddot


@dataclass(frozen=True)
class FrameContext:
    """All frame-derivative data at one state, for reuse by the reduction
    machinery: frame matrices, first derivatives of L, velocity Hessian,
    coordinate derivatives of the fiber gradient, and the complete-lift
    actions on L and P."""

    K: np.ndarray
    lam: np.ndarray
    R: np.ndarray
    Lx: np.ndarray
    Lth: np.ndarray
    Lvb: np.ndarray
    Lvg: np.ndarray
    H: np.ndarray
    Px: np.ndarray
    Pth: np.ndarray
    cX_L: np.ndarray
    cE_L: np.ndarray
    cX_P: np.ndarray
    cE_P: np.ndarray


def frame_context(sys: LagrangianSystem, x, th, vb, vg) -> FrameContext:
    n = sys.n
    conn = sys.connection
    K = conn.group.fundamental_coeffs(th)
    lam = conn.coeffs(x, th)
    R = curvature(conn, x, th)
    Lx, Lth, Lvb, Lvg = _grad(sys, x, th, vb, vg)
    H = _hess_vv(sys, x, th, vb, vg)
    Px, Pth = _mixed_yv(sys, x, th, vb, vg)
    Rv = R @ vb
    Cv = conn.group.algebra.structure_constants @ vg
    Hg = H[:, n:]
    cX_L = Lx - lam.T @ Lth - Rv.T @ Lvg
    cE_L = K.T @ Lth + Cv.T @ Lvg
    cX_P = Px - lam.T @ Pth - Rv.T @ Hg.T
    cE_P = K.T @ Pth + Cv.T @ Hg.T
    return FrameContext(K, lam, R, Lx, Lth, Lvb, Lvg, H, Px, Pth, cX_L, cE_L, cX_P, cE_P)


# ---------------------------------------------------------------------------
# invariance diagnostics (used by tests and system validation)

def invariance_residual(sys: LagrangianSystem, state: FullState) -> np.ndarray:
    """cEa~(L) for each a; zero iff L is invariant at this state."""
    x, th, vb, vg = state.x, state.theta, state.v_base, state.v_group
    K = sys.connection.group.fundamental_coeffs(th)
    _, Lth, _, Lvg = _grad(sys, x, th, vb, vg)
    Cv = sys.connection.group.algebra.structure_constants @ vg
    return K.T @ Lth + Cv.T @ Lvg


def equivariance_residual(sys: LagrangianSystem, state: FullState) -> np.ndarray:
    """cEa~(p_b) + C^c_ab p_c, evaluated from the derivative table."""
    x, th, vb, vg = state.x, state.theta, state.v_base, state.v_group
    n = sys.n
    K = sys.connection.group.fundamental_coeffs(th)
    C = sys.connection.group.algebra.structure_constants
    _, _, _, p = _grad(sys, x, th, vb, vg)
    H = _hess_vv(sys, x, th, vb, vg)
    _, Pth = _mixed_yv(sys, x, th, vb, vg)
    Cv = C @ vg
    cE_p = K.T @ Pth[:, n:] + Cv.T @ H[n:, n:]
    return cE_p + np.einsum("cab,c->ab", C, p)
