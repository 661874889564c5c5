"""Independent oracles used by the tests.

Everything here is deliberately brute force and shares no code with the
library paths it checks: plain finite differences of coordinate
Lagrangians, rank tests by Gaussian elimination, and direct quadrature.
"""

import numpy as np


def fd_grad(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.empty(x.size)
    for k in range(x.size):
        step = h * (1.0 + abs(x[k]))
        xp = x.copy(); xp[k] += step
        xm = x.copy(); xm[k] -= step
        out[k] = (f(xp) - f(xm)) / (2 * step)
    return out


def brute_force_nullspace_dim(mat, tol=1e-9):
    """Kernel dimension by Gaussian elimination with partial pivoting."""
    a = np.array(mat, dtype=float)
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank >= rows:
            break
        piv = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[piv, col]) <= tol:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank] = a[rank] / a[rank, col]
        for r in range(rows):
            if r != rank:
                a[r] = a[r] - a[r, col] * a[rank]
        rank += 1
    return cols - rank


def coordinate_el_rhs(lagrangian, q, qdot, h=1e-5):
    """Accelerations of a coordinate Lagrangian L(q, qdot) by brute force:
    solve M qddot = dL/dq - (d/dt) dL/dqdot|_{explicit}, with every
    derivative taken by central differences of L itself."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    d = q.size

    def dLdqdot(qq, vv):
        return fd_grad(lambda w: lagrangian(qq, w), vv, h)

    M = np.empty((d, d))
    for k in range(d):
        step = h * (1.0 + abs(qdot[k]))
        vp = qdot.copy(); vp[k] += step
        vm = qdot.copy(); vm[k] -= step
        M[:, k] = (dLdqdot(q, vp) - dLdqdot(q, vm)) / (2 * step)
    dPdq = np.empty((d, d))
    for k in range(d):
        step = h * (1.0 + abs(q[k]))
        qp = q.copy(); qp[k] += step
        qm = q.copy(); qm[k] -= step
        dPdq[:, k] = (dLdqdot(qp, qdot) - dLdqdot(qm, qdot)) / (2 * step)
    rhs = fd_grad(lambda w: lagrangian(w, qdot), q, h) - dPdq @ qdot
    return np.linalg.solve(M, rhs)


def trapezoid_quadrature(times, values):
    """Cumulative integral of sampled values, trapezoid rule."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    dt = np.diff(times)
    increments = 0.5 * (values[1:] + values[:-1]) * dt[:, None] if values.ndim > 1 \
        else 0.5 * (values[1:] + values[:-1]) * dt
    out[1:] = np.cumsum(increments, axis=0)
    return out


def se2_coordinate_lagrangian(A):
    """The benchmark Lagrangian in plain coordinates (x, y, z, theta)."""

    def lag(q, qdot):
        th = q[3]
        return (0.5 * float(qdot @ qdot)
                + A * (np.sin(th) * qdot[2] + np.cos(th) * qdot[1]) * qdot[3])

    return lag
