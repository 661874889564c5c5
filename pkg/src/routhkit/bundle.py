"""Trivial principal bundle M = S x G with a principal connection.

The standard frame is X_i = d/dx^i - Lambda^a_i d/dtheta^a together with
the fundamental fields Ea~ = K^b_a d/dtheta^b.  Quasi-velocities (v^i,
v^a) are the components of a velocity in this frame.  The curvature
components R^a_ij are defined by [X_i, X_j] = R^a_ij Ea~.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ChartError, DimensionError
from .lie import GroupChart

FD_STEP = 1e-5  # relative central-difference step for coefficient fields


@dataclass(frozen=True)
class BundleConnection:
    """Connection coefficients Lambda[a, i](x, theta) on S x G.

    ``coeffs`` evaluates the (m, n) matrix Lambda.  Optional analytic
    hooks: ``coeffs_dx``/``coeffs_dtheta`` return d Lambda appended with
    the derivative axis; ``curvature_fn`` returns R[a, i, j] directly and
    short-circuits the finite-difference path.
    """

    base_dim: int
    group: GroupChart
    coeffs: Callable[[np.ndarray, np.ndarray], np.ndarray]
    coeffs_dx: Optional[Callable] = None
    coeffs_dtheta: Optional[Callable] = None
    curvature_fn: Optional[Callable] = None
    name: str = ""

    @property
    def n(self) -> int:
        return self.base_dim

    @property
    def m(self) -> int:
        return self.group.dim


def trivial_connection(base_dim: int, group: GroupChart) -> BundleConnection:
    zero = np.zeros((group.dim, base_dim))
    zero_R = np.zeros((group.dim, base_dim, base_dim))
    return BundleConnection(
        base_dim,
        group,
        coeffs=lambda x, theta: zero,
        coeffs_dx=lambda x, theta: np.zeros((group.dim, base_dim, base_dim)),
        coeffs_dtheta=lambda x, theta: np.zeros((group.dim, base_dim, group.dim)),
        curvature_fn=lambda x, theta: zero_R,
        name="trivial",
    )


@dataclass(frozen=True)
class FullState:
    """Point of TM in bundle coordinates and quasi-velocities."""

    x: np.ndarray
    theta: np.ndarray
    v_base: np.ndarray
    v_group: np.ndarray

    def __post_init__(self):
        for name in ("x", "theta", "v_base", "v_group"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if self.v_base.shape != self.x.shape or self.v_group.shape != self.theta.shape:
            raise DimensionError("velocity components must match coordinate dimensions")

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def m(self) -> int:
        return self.theta.size

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x, self.theta, self.v_base, self.v_group])

    @staticmethod
    def unpack(flat: np.ndarray, n: int, m: int) -> "FullState":
        flat = np.asarray(flat, dtype=float)
        if flat.size != 2 * (n + m):
            raise DimensionError(f"flat state must have length {2 * (n + m)}")
        return FullState(flat[:n], flat[n:n + m], flat[n + m:2 * n + m], flat[2 * n + m:])


def _coeff_derivatives(conn: BundleConnection, x, theta):
    """(dLambda/dx [a,i,j], dLambda/dtheta [a,i,b]) by hooks or FD."""
    if conn.coeffs_dx is not None and conn.coeffs_dtheta is not None:
        return conn.coeffs_dx(x, theta), conn.coeffs_dtheta(x, theta)
    n, m = conn.n, conn.m
    dx = np.empty((m, n, n))
    for j in range(n):
        h = FD_STEP * (1.0 + abs(x[j]))
        xp = x.copy(); xp[j] += h
        xm = x.copy(); xm[j] -= h
        dx[:, :, j] = (conn.coeffs(xp, theta) - conn.coeffs(xm, theta)) / (2 * h)
    dth = np.empty((m, n, m))
    for b in range(m):
        h = FD_STEP * (1.0 + abs(theta[b]))
        tp = theta.copy(); tp[b] += h
        tm = theta.copy(); tm[b] -= h
        dth[:, :, b] = (conn.coeffs(x, tp) - conn.coeffs(x, tm)) / (2 * h)
    return dx, dth


def curvature(conn: BundleConnection, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Curvature components R[a, i, j] with [X_i, X_j] = R^a_ij Ea~.

    The bracket of the horizontal frame fields has theta-components
    -X_i(Lambda^b_j) + X_j(Lambda^b_i); solving K R = bracket recovers
    the frame components.  An analytic hook on the connection wins.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if conn.curvature_fn is not None:
        return conn.curvature_fn(x, theta)
    lam = conn.coeffs(x, theta)
    dlam_dx, dlam_dth = _coeff_derivatives(conn, x, theta)
    # X_i(Lambda^b_j) = dLambda^b_j/dx^i - Lambda^a_i dLambda^b_j/dtheta^a
    xi_lam = np.einsum("bji->bij", dlam_dx) - np.einsum("ai,bja->bij", lam, dlam_dth)
    bracket_theta = -xi_lam + np.einsum("bij->bji", xi_lam)
    K = conn.group.fundamental_coeffs(theta)
    try:
        R = np.linalg.solve(K, bracket_theta.reshape(conn.m, -1)).reshape(conn.m, conn.n, conn.n)
    except np.linalg.LinAlgError as exc:
        raise ChartError(f"singular frame matrix K at theta={theta}") from exc
    return R


def to_quasi_velocities(
    conn: BundleConnection, x, theta, xdot, thetadot
) -> FullState:
    """Frame components of a coordinate velocity: v^i = xdot^i and
    K v_group = thetadot + Lambda xdot."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    xdot = np.atleast_1d(np.asarray(xdot, dtype=float))
    thetadot = np.atleast_1d(np.asarray(thetadot, dtype=float))
    K = conn.group.fundamental_coeffs(theta)
    lam = conn.coeffs(x, theta)
    try:
        v_group = np.linalg.solve(K, thetadot + lam @ xdot)
    except np.linalg.LinAlgError as exc:
        raise ChartError(f"singular frame matrix K at theta={theta}") from exc
    return FullState(x, theta, xdot, v_group)


def from_quasi_velocities(conn: BundleConnection, state: FullState):
    """Coordinate velocities (xdot, thetadot) of a quasi-velocity state."""
    K = conn.group.fundamental_coeffs(state.theta)
    lam = conn.coeffs(state.x, state.theta)
    thetadot = K @ state.v_group - lam @ state.v_base
    return state.v_base.copy(), thetadot


def validate_connection(conn: BundleConnection, points) -> dict:
    """Residuals of the connection contract at (x, theta) samples:
    invariance of the horizontal fields ([Ea~, X_i] = 0) and curvature
    antisymmetry."""
    out = {"horizontal_invariance": 0.0, "curvature_antisymmetry": 0.0}
    chart = conn.group
    for x, theta in points:
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        K = chart.fundamental_coeffs(theta)
        _, dlam_dth = _coeff_derivatives(conn, x, theta)
        # theta-components of [Ea~, X_i]:
        #   Ea~(-Lambda^b_i) - X_i(K^b_a); K is x-independent on S x G
        from .lie import _fd_theta
        dK = _fd_theta(chart.fundamental_coeffs, theta)  # dK[b, a, e]
        lam = conn.coeffs(x, theta)
        term1 = -np.einsum("ea,bie->bia", K, dlam_dth)
        term2 = np.einsum("ei,bae->bia", lam, dK)
        out["horizontal_invariance"] = max(
            out["horizontal_invariance"], float(np.max(np.abs(term1 + term2)))
        )
        R = curvature(conn, x, theta)
        out["curvature_antisymmetry"] = max(
            out["curvature_antisymmetry"], float(np.max(np.abs(R + np.swapaxes(R, 1, 2))))
        )
    return out
