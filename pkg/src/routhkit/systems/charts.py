"""Group charts for the built-in systems.

Each chart fixes coordinates adapted to the isotropy subalgebra of the
momentum family its system works with: the first block of coordinates
moves along the G_mu orbits (left multiplication), the rest are
invariant under them.

* Translation groups R^m: global linear chart.
* SE(2): coordinates (y', z', theta) with y' = y, z' = z - nu*y for a
  basis parameter nu, adapted to the isotropy of momenta with linear
  part (1, nu); nu = 0 recovers the plain (y, z, theta) chart.
* SO(3): product coordinates (phi, s1, s2) with
  g = Rz(phi) exp(s1 e1^ + s2 e2^), adapted to rotations about the z
  axis, in the cyclic basis (e3, e1, e2).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ChartError
from ..lie import GroupChart, LieAlgebra, abelian_algebra


# ---------------------------------------------------------------------------
# translations

def translation_chart(m: int) -> GroupChart:
    eye = np.eye(m)
    return GroupChart(
        algebra=abelian_algebra(m),
        identity_coords=np.zeros(m),
        multiply=lambda a, b: a + b,
        inverse=lambda a: -a,
        adjoint=lambda a: eye,
        fundamental_coeffs=lambda a: eye,
        exact_flow=lambda xi, t, g0: g0 + t * np.asarray(xi, dtype=float),
        name=f"R^{m}",
    )


# ---------------------------------------------------------------------------
# SE(2)

def se2_algebra(nu: float) -> LieAlgebra:
    """se(2) in the basis E1 = e1 + nu e2, E2 = e2, E3 = e3.

    The bracket is the matrix commutator of the homogeneous
    representation, [e1, e3] = -e2 and [e2, e3] = e1, which is the sign
    for which the fundamental fields of the left action satisfy
    [Ea~, Eb~] = -C^c_ab Ec~ (checked by validate_chart).
    """
    C = np.zeros((3, 3, 3))
    # [E1, E3] = nu E1 - (1 + nu^2) E2
    C[0, 0, 2] = nu
    C[1, 0, 2] = -(1.0 + nu * nu)
    # [E2, E3] = E1 - nu E2
    C[0, 1, 2] = 1.0
    C[1, 1, 2] = -nu
    C[:, 2, 0] = -C[:, 0, 2]
    C[:, 2, 1] = -C[:, 1, 2]
    return LieAlgebra(C, name=f"se(2)[nu={nu:g}]")


def _se2_exp_matrix(w: np.ndarray) -> np.ndarray:
    """exp of (v1, v2, omega) in the homogeneous 3x3 representation."""
    v1, v2, om = w
    M = np.eye(3)
    if abs(om) < 1e-12:
        M[0, 2] = v1
        M[1, 2] = v2
        return M
    s, c = math.sin(om), math.cos(om)
    M[0, 0], M[0, 1] = c, -s
    M[1, 0], M[1, 1] = s, c
    M[0, 2] = (s * v1 - (1 - c) * v2) / om
    M[1, 2] = ((1 - c) * v1 + s * v2) / om
    return M


def se2_chart(nu: float = 0.0) -> GroupChart:
    """SE(2) in coordinates (y', z', theta), y' = y, z' = z - nu*y.

    The theta coordinate is kept unwrapped: multiplication adds angles
    without modular reduction, which suits trajectories whose angle
    grows linearly.
    """
    alg = se2_algebra(nu)

    def to_orig(t):
        return t[0], t[1] + nu * t[0], t[2]

    def from_orig(y, z, th):
        return np.array([y, z - nu * y, th])

    def multiply(a, b):
        y1, z1, t1 = to_orig(a)
        y2, z2, t2 = to_orig(b)
        c, s = math.cos(t1), math.sin(t1)
        return from_orig(y2 * c - z2 * s + y1, y2 * s + z2 * c + z1, t1 + t2)

    def inverse(a):
        y, z, t = to_orig(a)
        c, s = math.cos(t), math.sin(t)
        return from_orig(-(c * y + s * z), s * y - c * z, -t)

    P = np.array([[1.0, 0.0, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 1.0]])
    Pinv = np.array([[1.0, 0.0, 0.0], [-nu, 1.0, 0.0], [0.0, 0.0, 1.0]])

    def adjoint(a):
        y, z, t = to_orig(a)
        c, s = math.cos(t), math.sin(t)
        A = np.array([[c, -s, z], [s, c, -y], [0.0, 0.0, 1.0]])
        return Pinv @ A @ P

    def fundamental_coeffs(a):
        y1, z1 = a[0], a[1]
        return np.array([
            [1.0, 0.0, -z1 - nu * y1],
            [0.0, 1.0, (1.0 + nu * nu) * y1 + nu * z1],
            [0.0, 0.0, 1.0],
        ])

    def exact_flow(xi, t, g0):
        w = P @ np.asarray(xi, dtype=float)
        y0, z0, t0 = to_orig(g0)
        M0 = np.array([
            [math.cos(t0), -math.sin(t0), y0],
            [math.sin(t0), math.cos(t0), z0],
            [0.0, 0.0, 1.0],
        ])
        M = _se2_exp_matrix(t * w) @ M0
        th = math.atan2(M[1, 0], M[0, 0])
        return from_orig(M[0, 2], M[1, 2], th)

    return GroupChart(
        algebra=alg,
        identity_coords=np.zeros(3),
        multiply=multiply,
        inverse=inverse,
        adjoint=adjoint,
        fundamental_coeffs=fundamental_coeffs,
        exact_flow=exact_flow,
        name=f"SE(2)[nu={nu:g}]",
    )


# ---------------------------------------------------------------------------
# SO(3)

_SO3_DOMAIN_MARGIN = 0.05
# columns = xyz components of the cyclic basis (f1, f2, f3) = (e3, e1, e2)
_P_CYCLIC = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


def so3_algebra() -> LieAlgebra:
    """so(3) in a cyclic basis: [f_a, f_b] = eps_abc f_c."""
    C = np.zeros((3, 3, 3))
    for a in range(3):
        for b in range(3):
            for c in range(3):
                C[c, a, b] = _levi_civita(a, b, c)
    return LieAlgebra(C, name="so(3)")


def _levi_civita(i, j, k):
    if (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        return 1.0
    if (i, j, k) in ((0, 2, 1), (2, 1, 0), (1, 0, 2)):
        return -1.0
    return 0.0


def _hat(u):
    return np.array([
        [0.0, -u[2], u[1]],
        [u[2], 0.0, -u[0]],
        [-u[1], u[0], 0.0],
    ])


def _rodrigues(u):
    phi = math.sqrt(float(u[0] ** 2 + u[1] ** 2 + u[2] ** 2))
    H = _hat(u)
    if phi < 1e-8:
        return np.eye(3) + H + 0.5 * (H @ H)
    a = math.sin(phi) / phi
    b = (1.0 - math.cos(phi)) / (phi * phi)
    return np.eye(3) + a * H + b * (H @ H)


def _left_jacobian(u):
    """J with d/dt exp(u(t)^) . exp(-u^) = (J(u) udot)^."""
    phi = math.sqrt(float(u[0] ** 2 + u[1] ** 2 + u[2] ** 2))
    H = _hat(u)
    if phi < 1e-8:
        return np.eye(3) + 0.5 * H + (H @ H) / 6.0
    a = (1.0 - math.cos(phi)) / (phi * phi)
    b = (phi - math.sin(phi)) / (phi ** 3)
    return np.eye(3) + a * H + b * (H @ H)


def _rz(phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def so3_to_matrix(theta: np.ndarray) -> np.ndarray:
    return _rz(theta[0]) @ _rodrigues(np.array([theta[1], theta[2], 0.0]))


def so3_from_matrix(R: np.ndarray) -> np.ndarray:
    c = min(1.0, max(-1.0, float(R[2, 2])))
    beta = math.acos(c)
    if beta > math.pi - 1e-9:
        raise ChartError("SO(3) product chart: point at the |s| = pi boundary")
    if beta < 1e-9:
        f = 1.0 + beta * beta / 6.0
    else:
        f = beta / math.sin(beta)
    s1 = f * R[2, 1]
    s2 = -f * R[2, 0]
    M = R @ _rodrigues(np.array([-s1, -s2, 0.0]))
    phi = math.atan2(M[1, 0], M[0, 0])
    return np.array([phi, s1, s2])


def so3_product_chart() -> GroupChart:
    """SO(3) chart g = Rz(phi) exp(s1 e1^ + s2 e2^), cyclic basis.

    Adapted to momenta along the first dual basis vector (angular
    momentum about z): the isotropy orbits are the phi lines.  Domain:
    s1^2 + s2^2 < (pi - margin)^2.
    """
    alg = so3_algebra()

    def multiply(a, b):
        return so3_from_matrix(so3_to_matrix(a) @ so3_to_matrix(b))

    def inverse(a):
        return so3_from_matrix(so3_to_matrix(a).T)

    def adjoint(a):
        return _P_CYCLIC.T @ so3_to_matrix(a) @ _P_CYCLIC

    def fundamental_coeffs(a):
        s = np.array([a[1], a[2], 0.0])
        RzJ = _rz(a[0]) @ _left_jacobian(s)
        M = np.empty((3, 3))
        M[:, 0] = (0.0, 0.0, 1.0)
        M[:, 1] = RzJ[:, 0]
        M[:, 2] = RzJ[:, 1]
        try:
            return np.linalg.solve(M, _P_CYCLIC)
        except np.linalg.LinAlgError as exc:
            raise ChartError("SO(3) product chart frame is singular") from exc

    def domain_ok(a):
        return a[1] ** 2 + a[2] ** 2 < (math.pi - _SO3_DOMAIN_MARGIN) ** 2

    def exact_flow(xi, t, g0):
        w = _P_CYCLIC @ np.asarray(xi, dtype=float)
        return so3_from_matrix(_rodrigues(t * w) @ so3_to_matrix(g0))

    return GroupChart(
        algebra=alg,
        identity_coords=np.zeros(3),
        multiply=multiply,
        inverse=inverse,
        adjoint=adjoint,
        fundamental_coeffs=fundamental_coeffs,
        domain_ok=domain_ok,
        exact_flow=exact_flow,
        name="SO(3)[z-adapted]",
    )
