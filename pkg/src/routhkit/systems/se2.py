"""The SE(2)-symmetric benchmark system.

Lagrangian on R x SE(2), in coordinate velocities:

    L = 1/2 (xdot^2 + ydot^2 + zdot^2 + thetadot^2)
        + A (sin(theta) zdot + cos(theta) ydot) thetadot,

regular iff A^2 != 1, with the trivial connection on R x SE(2) -> R.
The closed-form solution with theta_0 = 0 and the momentum-adapted
initial constants makes this the main oracle system: full dynamics,
reduced dynamics on (z', theta), and reconstruction of y(t) all have
printed formulas.

The working chart is the momentum-adapted one: basis E1 = e1 + mu e2,
E2 = e2, E3 = e3 and coordinates (y', z', theta) = (y, z - mu y, theta),
for which the level mu_adapted = (1 + mu^2, mu, 0) has isotropy span{E1}
aligned with the first coordinate.  ``basis="original"`` builds the same
dynamics in the plain basis/chart (nu = 0), used for frame-independence
checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from ..bundle import FullState, trivial_connection, to_quasi_velocities
from ..errors import SpecError
from ..lagrangian import LagrangianSystem
from ..lie import aligned_isotropy_split
from ..routh import MomentumLevel, ReducedState
from .charts import se2_chart


@dataclass(frozen=True)
class SE2Initial:
    """Free initial constants; the momentum-dependent ones (ydot0, zdot0,
    z0) are derived as in the reference solution: ydot0 = 1 - A thetadot0,
    zdot0 = mu, z0 = mu y0 + A ydot0 + thetadot0, theta0 = 0."""

    x0: float = 0.0
    xdot0: float = 1.0
    y0: float = 0.0
    thetadot0: float = 1.0


@dataclass(frozen=True)
class SE2System:
    """Packaged SE(2) system: Lagrangian system, momentum level, chart,
    closed-form solutions, and initial-state builders."""

    system: LagrangianSystem
    level: MomentumLevel
    A: float
    mu: float
    nu: float  # basis parameter of the working chart (mu, or 0 for original)

    @property
    def chart(self):
        return self.system.chart

    def derived_constants(self, ic: SE2Initial) -> dict:
        ydot0 = 1.0 - self.A * ic.thetadot0
        zdot0 = self.mu
        z0 = self.mu * ic.y0 + self.A * ydot0 + ic.thetadot0
        return {"ydot0": ydot0, "zdot0": zdot0, "z0": z0, "theta0": 0.0}

    def closed_form(self, t: np.ndarray, ic: SE2Initial) -> np.ndarray:
        """Reference solution columns (x, y, z, theta), original coords."""
        t = np.asarray(t, dtype=float)
        A, c = self.A, self.derived_constants(ic)
        w = ic.thetadot0
        x = ic.xdot0 * t + ic.x0
        y = -A * np.sin(w * t) + (c["ydot0"] + A * w) * t + ic.y0
        z = A * np.cos(w * t) + c["zdot0"] * t + c["z0"] - A
        theta = w * t
        return np.column_stack([x, y, z, theta])

    def reduced_closed_form(self, t: np.ndarray, ic: SE2Initial) -> np.ndarray:
        """Reference reduced solution columns (z', theta)."""
        t = np.asarray(t, dtype=float)
        A, mu, w = self.A, self.mu, ic.thetadot0
        zp = A * np.cos(w * t) + A * mu * np.sin(w * t) + (1.0 - A * A) * w
        return np.column_stack([zp, w * t])

    def to_chart(self, yztheta: np.ndarray) -> np.ndarray:
        """Original (y, z, theta) -> working chart (y', z', theta)."""
        y, z, th = yztheta[..., 0], yztheta[..., 1], yztheta[..., 2]
        return np.stack([y, z - self.nu * y, th], axis=-1)

    def to_original(self, chart_pt: np.ndarray) -> np.ndarray:
        yp, zp, th = chart_pt[..., 0], chart_pt[..., 1], chart_pt[..., 2]
        return np.stack([yp, zp + self.nu * yp, th], axis=-1)

    def initial_state(self, ic: SE2Initial) -> FullState:
        """Full quasi-velocity state in the working chart; lies on the
        momentum level by construction of the derived constants."""
        c = self.derived_constants(ic)
        return self.state_from_raw(ic.x0, ic.xdot0, ic.y0, c["z0"], 0.0,
                                   c["ydot0"], c["zdot0"], ic.thetadot0)

    def state_from_raw(self, x0, xdot0, y0, z0, theta0, ydot0, zdot0, thetadot0) -> FullState:
        """Full state from raw coordinate data (not necessarily on the
        momentum level)."""
        theta = self.to_chart(np.array([y0, z0, theta0]))
        chart_vel = np.array([ydot0, zdot0 - self.nu * ydot0, thetadot0])
        return to_quasi_velocities(
            self.system.connection, np.array([x0]), theta,
            np.array([xdot0]), chart_vel,
        )

    def initial_reduced(self, ic: SE2Initial) -> ReducedState:
        st = self.initial_state(ic)
        return ReducedState(st.x, st.theta[1:], st.v_base)


def _se2_lagrangian(A: float, nu: float):
    """Quasi-velocity Lagrangian and its analytic derivatives.

    With (y, z) the original group coordinates of the chart point and
    u1 = v1 - z v3, u2 = nu v1 + v2 + y v3 the original (ydot, zdot):

        L = 1/2 vx^2 + 1/2 u1^2 + 1/2 u2^2 + 1/2 v3^2
            + A (sin(th) u2 + cos(th) u1) v3.
    """

    def split(th):
        y1, z1, t = th[0], th[1], th[2]
        return y1, z1 + nu * y1, math.sin(t), math.cos(t)

    def lag(x, th, vb, vg):
        y, z, s, c = split(th)
        v1, v2, v3 = vg
        u1 = v1 - z * v3
        u2 = nu * v1 + v2 + y * v3
        return 0.5 * (vb[0] ** 2 + u1 * u1 + u2 * u2 + v3 * v3) \
            + A * (s * u2 + c * u1) * v3

    def grad(x, th, vb, vg):
        y, z, s, c = split(th)
        v1, v2, v3 = vg
        u1 = v1 - z * v3
        u2 = nu * v1 + v2 + y * v3
        Lvb = np.array([vb[0]])
        Lvg = np.array([
            u1 + nu * u2 + A * (s * nu + c) * v3,
            u2 + A * s * v3,
            -z * u1 + y * u2 + v3 + A * (s * u2 + c * u1) + A * (s * y - c * z) * v3,
        ])
        dLdy = v3 * (u2 + A * s * v3)
        dLdz = -v3 * (u1 + A * c * v3)
        dLdth = A * (c * u2 - s * u1) * v3
        Lth = np.array([dLdy + nu * dLdz, dLdz, dLdth])
        return np.zeros(1), Lth, Lvb, Lvg

    def hess_vv(x, th, vb, vg):
        y, z, s, c = split(th)
        g13 = -z + nu * y + A * (c + nu * s)
        g23 = y + A * s
        g33 = 1.0 + y * y + z * z + 2.0 * A * (y * s - z * c)
        return np.array([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0 + nu * nu, nu, g13],
            [0.0, nu, 1.0, g23],
            [0.0, g13, g23, g33],
        ])

    def hess_yv(x, th, vb, vg):
        y, z, s, c = split(th)
        v1, v2, v3 = vg
        u1 = v1 - z * v3
        u2 = nu * v1 + v2 + y * v3
        Px = np.zeros((1, 4))
        dPdy = np.array([0.0, nu * v3, v3, u2 + y * v3 + 2.0 * A * s * v3])
        dPdz = np.array([0.0, -v3, 0.0, -u1 + z * v3 - 2.0 * A * c * v3])
        dPdth = np.array([
            0.0,
            A * (c * nu - s) * v3,
            A * c * v3,
            A * (c * u2 - s * u1) + A * (c * y + s * z) * v3,
        ])
        Pth = np.vstack([dPdy + nu * dPdz, dPdz, dPdth])
        return Px, Pth

    return lag, grad, hess_vv, hess_yv


def make_se2(A: float, mu_param: float, basis: str = "adapted") -> SE2System:
    """Build the SE(2) benchmark system.

    ``mu_param`` is the parameter mu of the momentum family: the momentum
    covector is e^1 + mu e^2 normalized as in the reference computation,
    i.e. (1 + mu^2) E^1 + mu E^2 in the adapted dual basis, with third
    component zero.  ``basis="original"`` keeps the plain (y, z, theta)
    chart and basis (isotropy is then not coordinate-aligned; the system
    serves frame-independence checks of the full dynamics only).
    """
    if A * A == 1.0:
        raise SpecError("SE(2) system is regular only for A^2 != 1")
    if basis not in ("adapted", "original"):
        raise SpecError("basis must be 'adapted' or 'original'")
    nu = mu_param if basis == "adapted" else 0.0
    chart = se2_chart(nu)
    conn = trivial_connection(1, chart)
    lag, grad, hess_vv, hess_yv = _se2_lagrangian(A, nu)
    system = LagrangianSystem(
        connection=conn,
        lagrangian=lag,
        grad=grad,
        hess_vv=hess_vv,
        hess_yv=hess_yv,
        theta_independent=False,
        simple_mechanical=True,
        base_labels=("x",),
        group_labels=("yp", "zp", "theta") if basis == "adapted" else ("y", "z", "theta"),
        name=f"se2[A={A:g}, mu={mu_param:g}, {basis}]",
    )
    if basis == "adapted":
        mu_vec = np.array([1.0 + mu_param ** 2, mu_param, 0.0])
        split = aligned_isotropy_split(chart.algebra, mu_vec, n_A=1)
    else:
        mu_vec = np.array([1.0, mu_param, 0.0])
        from ..lie import isotropy_subalgebra
        split = isotropy_subalgebra(chart.algebra, mu_vec)
    level = MomentumLevel(mu_vec, split)
    return SE2System(system=system, level=level, A=A, mu=mu_param, nu=nu)


def make_se2_nonsimple(A: float, mu_param: float, eps: float = 0.15) -> SE2System:
    """SE(2) system plus an invariant cross term eps * xdot * w1, where
    w1 is the first body-velocity component (quasi-velocity with respect
    to the invariant frame).  Breaks g_ia = 0, so the mechanical and
    vertical-lift connections on the level set genuinely differ.  No
    closed forms; used for residual-based reconstruction tests.
    """
    base = make_se2(A, mu_param, basis="adapted")
    chart = base.chart
    conn = base.system.connection
    nu = mu_param
    lag0, grad0, hess0, _ = _se2_lagrangian(A, nu)

    P = np.array([[1.0, 0.0, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 1.0]])
    Pinv = np.array([[1.0, 0.0, 0.0], [-nu, 1.0, 0.0], [0.0, 0.0, 1.0]])
    dA_dy = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 0.0, 0.0]])
    dA_dz = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

    def adjoint_blocks(th):
        y, z = th[0], th[1] + nu * th[0]
        c, s = math.cos(th[2]), math.sin(th[2])
        A_orig = np.array([[c, -s, z], [s, c, -y], [0.0, 0.0, 1.0]])
        dA_dth = np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])
        Aad = Pinv @ A_orig @ P
        # chart derivatives: d/dy' = d/dy + nu d/dz
        dAs = [Pinv @ (dA_dy + nu * dA_dz) @ P, Pinv @ dA_dz @ P, Pinv @ dA_dth @ P]
        return Aad, dAs

    def abar_row(th):
        Aad, _ = adjoint_blocks(th)
        return np.linalg.solve(Aad.T, np.array([1.0, 0.0, 0.0]))

    def lag(x, th, vb, vg):
        return lag0(x, th, vb, vg) + eps * vb[0] * float(abar_row(th) @ vg)

    def grad(x, th, vb, vg):
        Lx, Lth, Lvb, Lvg = grad0(x, th, vb, vg)
        Aad, dAs = adjoint_blocks(th)
        Abar = np.linalg.inv(Aad)
        row = Abar[0]
        Lvb = Lvb + np.array([eps * float(row @ vg)])
        Lvg = Lvg + eps * vb[0] * row
        dLth = np.array([
            -eps * vb[0] * float((Abar @ dA @ Abar)[0] @ vg) for dA in dAs
        ])
        return Lx, Lth + dLth, Lvb, Lvg

    def hess_vv(x, th, vb, vg):
        H = hess0(x, th, vb, vg)
        row = abar_row(th)
        H = H.copy()
        H[0, 1:] += eps * row
        H[1:, 0] += eps * row
        return H

    system = LagrangianSystem(
        connection=conn,
        lagrangian=lag,
        grad=grad,
        hess_vv=hess_vv,
        simple_mechanical=False,
        base_labels=("x",),
        group_labels=("yp", "zp", "theta"),
        name=f"se2-nonsimple[A={A:g}, mu={mu_param:g}, eps={eps:g}]",
    )
    return SE2System(system=system, level=base.level, A=A, mu=mu_param, nu=nu)
