"""Invariant block-metric systems on S x G.

Covers every built-in family except SE(2): Lagrangians of the form

    L = 1/2 g_ij(x) v^i v^j + 1/2 h_ab(x) v^a v^b - V(x)

in quasi-velocities adapted to a connection given by a gauge potential
gamma^a_i(x) acting through the invariant frame, X_i = d/dx^i -
gamma^a_i Ea^.  Invariance of L requires h(x) to be ad-invariant
pointwise (vacuous for Abelian groups); this is validated at sample
points on construction.  The frame coefficients are
Lambda = K(theta) A(theta) gamma(x), and the curvature is
R^b_ij = A^b_c F^c_ij with the gauge field strength

    F^c_ij = d_j gamma^c_i - d_i gamma^c_j + C^c_ab gamma^a_i gamma^b_j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..bundle import BundleConnection
from ..errors import SpecError
from ..lagrangian import LagrangianSystem
from ..lie import GroupChart

FD_STEP = 1e-6


@dataclass(frozen=True)
class MatrixField:
    """Matrix-valued function of the base point with optional analytic
    jacobian (derivative axis appended)."""

    value: Callable[[np.ndarray], np.ndarray]
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def d(self, x: np.ndarray) -> np.ndarray:
        if self.jac is not None:
            return self.jac(x)
        cols = []
        for j in range(x.size):
            h = FD_STEP * (1.0 + abs(x[j]))
            xp = x.copy(); xp[j] += h
            xm = x.copy(); xm[j] -= h
            cols.append((self.value(xp) - self.value(xm)) / (2 * h))
        return np.stack(cols, axis=-1)


def constant_field(arr: np.ndarray) -> MatrixField:
    arr = np.asarray(arr, dtype=float)
    zero = np.zeros(arr.shape + (0,))

    def jac(x):
        return np.zeros(arr.shape + (x.size,))

    return MatrixField(value=lambda x: arr, jac=jac)


def linear_field(const: np.ndarray, lin: Optional[np.ndarray] = None) -> MatrixField:
    """const + lin[..., j] x^j."""
    const = np.asarray(const, dtype=float)
    if lin is None:
        return constant_field(const)
    lin = np.asarray(lin, dtype=float)

    return MatrixField(value=lambda x: const + lin @ x, jac=lambda x: lin)


@dataclass(frozen=True)
class ScalarField:
    value: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def d(self, x: np.ndarray) -> np.ndarray:
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        out = np.empty(x.size)
        for j in range(x.size):
            h = FD_STEP * (1.0 + abs(x[j]))
            xp = x.copy(); xp[j] += h
            xm = x.copy(); xm[j] -= h
            out[j] = (self.value(xp) - self.value(xm)) / (2 * h)
        return out


def zero_potential(n: int) -> ScalarField:
    return ScalarField(value=lambda x: 0.0, grad=lambda x: np.zeros(n))


def _check_spd(mat: np.ndarray, what: str):
    if np.max(np.abs(mat - mat.T)) > 1e-10:
        raise SpecError(f"{what} is not symmetric")
    if np.min(np.linalg.eigvalsh(mat)) <= 0:
        raise SpecError(f"{what} is not positive-definite at a sample point")


def _check_ad_invariant(h: np.ndarray, C: np.ndarray, what: str):
    skew = np.einsum("bac,bd->acd", C, h) + np.einsum("bad,bc->acd", C, h)
    if np.max(np.abs(skew)) > 1e-10:
        raise SpecError(f"{what} violates the ad-invariance (skew) condition")


def gauge_field_strength(gamma: MatrixField, C: np.ndarray, x: np.ndarray) -> np.ndarray:
    """F[c, i, j] = d_j gamma^c_i - d_i gamma^c_j + C^c_ab gamma^a_i gamma^b_j."""
    g = gamma.value(x)
    dg = gamma.d(x)  # dg[c, i, j] = d gamma^c_i / d x^j
    return dg - np.einsum("cij->cji", dg) + np.einsum("cab,ai,bj->cij", C, g, g)


def make_block_system(
    chart: GroupChart,
    base_dim: int,
    base_metric: MatrixField,
    vertical_metric: MatrixField,
    potential: ScalarField,
    gauge: Optional[MatrixField] = None,
    sample_points: Optional[np.ndarray] = None,
    base_labels: Sequence[str] = (),
    group_labels: Sequence[str] = (),
    name: str = "",
) -> LagrangianSystem:
    """Assemble the Lagrangian system for block data on S x G.

    ``sample_points`` (rows of base points) are used for construction
    checks: symmetry and positive-definiteness of both metric blocks and
    ad-invariance of the vertical one.
    """
    m = chart.dim
    alg = chart.algebra
    C = alg.structure_constants
    n = base_dim
    probe = sample_points if sample_points is not None else np.vstack([np.zeros(n), 0.7 * np.ones(n)])
    for x in probe:
        x = np.asarray(x, dtype=float)
        _check_spd(base_metric.value(x), "base metric")
        h = vertical_metric.value(x)
        _check_spd(h, "vertical metric")
        _check_ad_invariant(h, C, "vertical metric")

    if gauge is None:
        gauge = constant_field(np.zeros((m, n)))

    def lam(x, theta):
        A = chart.adjoint(theta)
        K = chart.fundamental_coeffs(theta)
        return K @ A @ gauge.value(x)

    def curv(x, theta):
        F = gauge_field_strength(gauge, C, x)
        return np.tensordot(chart.adjoint(theta), F, axes=1)

    conn = BundleConnection(
        base_dim=n, group=chart, coeffs=lam, curvature_fn=curv,
        name=name or "block",
    )

    def lag(x, th, vb, vg):
        return float(
            0.5 * vb @ base_metric.value(x) @ vb
            + 0.5 * vg @ vertical_metric.value(x) @ vg
            - potential.value(x)
        )

    def grad(x, th, vb, vg):
        dg = base_metric.d(x)
        dh = vertical_metric.d(x)
        Lx = 0.5 * np.einsum("i,ijk,j->k", vb, dg, vb) \
            + 0.5 * np.einsum("a,abk,b->k", vg, dh, vg) - potential.d(x)
        return Lx, np.zeros(m), base_metric.value(x) @ vb, vertical_metric.value(x) @ vg

    def hess_vv(x, th, vb, vg):
        H = np.zeros((n + m, n + m))
        H[:n, :n] = base_metric.value(x)
        H[n:, n:] = vertical_metric.value(x)
        return H

    def hess_yv(x, th, vb, vg):
        dg = base_metric.d(x)
        dh = vertical_metric.d(x)
        Px = np.zeros((n, n + m))
        Px[:, :n] = np.einsum("ijk,j->ki", dg, vb)
        Px[:, n:] = np.einsum("abk,b->ka", dh, vg)
        return Px, np.zeros((m, n + m))

    return LagrangianSystem(
        connection=conn,
        lagrangian=lag,
        grad=grad,
        hess_vv=hess_vv,
        hess_yv=hess_yv,
        theta_independent=True,
        simple_mechanical=True,
        base_labels=tuple(base_labels) or tuple(f"x{i+1}" for i in range(n)),
        group_labels=tuple(group_labels) or tuple(f"th{a+1}" for a in range(m)),
        name=name,
    )
