"""Classical cyclic-coordinate systems: Abelian group R^m acting by
translation of the theta coordinates, Lagrangian

    L = 1/2 k_ij(x) xdot^i xdot^j + k_ia(x) xdot^i thetadot^a
        + 1/2 k_ab(x) thetadot^a thetadot^b - V(x).

With the mechanical connection Lambda^a_i = k^{ab} k_ib, the
quasi-velocity form decouples:

    L = 1/2 (k_ij - k^{ab} k_ia k_jb) v^i v^j + 1/2 k_ab v^a v^b - V,

so the system is simple mechanical.  The trivial-connection variant
keeps the cross term (g_ia = k_ia != 0), giving a non-simple test system
for which the two level-set connections genuinely differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..bundle import trivial_connection
from ..errors import SpecError
from ..lagrangian import LagrangianSystem
from ..lie import aligned_isotropy_split
from ..routh import MomentumLevel
from .blocks import MatrixField, ScalarField, constant_field, make_block_system
from .charts import translation_chart


def _as_field(obj) -> MatrixField:
    if isinstance(obj, MatrixField):
        return obj
    return constant_field(np.asarray(obj, dtype=float))


def _schur_field(k_ij: MatrixField, k_ia: MatrixField, k_ab: MatrixField) -> MatrixField:
    """g_ij(x) = k_ij - k_ia k^{ab} k_jb, with jacobian by product rule."""

    def value(x):
        kia = k_ia.value(x)
        kab_inv = np.linalg.inv(k_ab.value(x))
        return k_ij.value(x) - kia @ kab_inv @ kia.T

    def jac(x):
        if k_ij.jac is None or k_ia.jac is None or k_ab.jac is None:
            return None
        kia = k_ia.value(x)
        kinv = np.linalg.inv(k_ab.value(x))
        dkij = k_ij.d(x)
        dkia = k_ia.d(x)
        dkab = k_ab.d(x)
        dkinv = -np.einsum("ab,bck,cd->adk", kinv, dkab, kinv)
        term = (
            np.einsum("iak,ab,jb->ijk", dkia, kinv, kia)
            + np.einsum("ia,abk,jb->ijk", kia, dkinv, kia)
            + np.einsum("ia,ab,jbk->ijk", kia, kinv, dkia)
        )
        return dkij - term

    have_jacs = k_ij.jac is not None and k_ia.jac is not None and k_ab.jac is not None
    return MatrixField(value=value, jac=jac if have_jacs else None)


def _mechanical_gauge(k_ia: MatrixField, k_ab: MatrixField) -> MatrixField:
    """Lambda[a, i] = (k^{ab} k_ib)(x)."""

    def value(x):
        return np.linalg.inv(k_ab.value(x)) @ k_ia.value(x).T

    def jac(x):
        kia = k_ia.value(x)
        kinv = np.linalg.inv(k_ab.value(x))
        dkia = k_ia.d(x)
        dkab = k_ab.d(x)
        dkinv = -np.einsum("ab,bck,cd->adk", kinv, dkab, kinv)
        return np.einsum("abk,ib->aik", dkinv, kia) + np.einsum("ab,ibk->aik", kinv, dkia)

    have_jacs = k_ia.jac is not None and k_ab.jac is not None
    return MatrixField(value=value, jac=jac if have_jacs else None)


def make_classical(
    k_ij,
    k_ia,
    k_ab,
    potential: ScalarField,
    base_dim: Optional[int] = None,
    sample_points: Optional[np.ndarray] = None,
    name: str = "classical",
) -> LagrangianSystem:
    """Build the mechanical-connection system for the block data above.

    Coefficients may be constant arrays or MatrixFields.  The full
    coordinate-velocity block matrix must be positive-definite on the
    sampled region (checked via both Schur blocks).
    """
    k_ij = _as_field(k_ij)
    k_ia = _as_field(k_ia)
    k_ab = _as_field(k_ab)
    probe = sample_points if sample_points is not None else None
    if base_dim is None:
        if probe is None:
            raise SpecError("make_classical needs base_dim or sample_points")
        base_dim = np.asarray(probe[0]).size
    n = base_dim
    m = k_ab.value(np.zeros(n)).shape[0]
    try:
        sys = make_block_system(
            chart=translation_chart(m),
            base_dim=n,
            base_metric=_schur_field(k_ij, k_ia, k_ab),
            vertical_metric=k_ab,
            potential=potential,
            gauge=_mechanical_gauge(k_ia, k_ab),
            sample_points=probe,
            name=name,
        )
    except np.linalg.LinAlgError as exc:
        raise SpecError("k_ab is singular") from exc
    return sys


def make_classical_trivial(
    k_ij,
    k_ia,
    k_ab,
    potential: ScalarField,
    base_dim: int,
    name: str = "classical-trivial",
) -> LagrangianSystem:
    """Same coordinate Lagrangian with the trivial connection, so the
    quasi-velocities are plain coordinate velocities and g_ia = k_ia.
    Not simple mechanical; used to exercise the distinct level-set
    connections."""
    k_ij = _as_field(k_ij)
    k_ia = _as_field(k_ia)
    k_ab = _as_field(k_ab)
    n = base_dim
    m = k_ab.value(np.zeros(n)).shape[0]
    chart = translation_chart(m)
    conn = trivial_connection(n, chart)

    def lag(x, th, vb, vg):
        return float(
            0.5 * vb @ k_ij.value(x) @ vb + vb @ k_ia.value(x) @ vg
            + 0.5 * vg @ k_ab.value(x) @ vg - potential.value(x)
        )

    def grad(x, th, vb, vg):
        Lx = (
            0.5 * np.einsum("i,ijk,j->k", vb, k_ij.d(x), vb)
            + np.einsum("i,iak,a->k", vb, k_ia.d(x), vg)
            + 0.5 * np.einsum("a,abk,b->k", vg, k_ab.d(x), vg)
            - potential.d(x)
        )
        Lvb = k_ij.value(x) @ vb + k_ia.value(x) @ vg
        Lvg = k_ia.value(x).T @ vb + k_ab.value(x) @ vg
        return Lx, np.zeros(m), Lvb, Lvg

    def hess_vv(x, th, vb, vg):
        H = np.empty((n + m, n + m))
        H[:n, :n] = k_ij.value(x)
        H[:n, n:] = k_ia.value(x)
        H[n:, :n] = k_ia.value(x).T
        H[n:, n:] = k_ab.value(x)
        return H

    return LagrangianSystem(
        connection=conn,
        lagrangian=lag,
        grad=grad,
        hess_vv=hess_vv,
        theta_independent=True,
        simple_mechanical=False,
        name=name,
    )


@dataclass(frozen=True)
class ClassicalSystem:
    """Packaged classical instance with its momentum level and the data
    needed by the intro-form reduction oracle (connection coefficients
    and their curl)."""

    system: LagrangianSystem
    level: MomentumLevel
    k_ij: MatrixField
    k_ia: MatrixField
    k_ab: MatrixField
    potential: ScalarField

    def level_for(self, mu: np.ndarray) -> MomentumLevel:
        alg = self.system.chart.algebra
        return MomentumLevel(np.asarray(mu, dtype=float),
                             aligned_isotropy_split(alg, np.asarray(mu, dtype=float), alg.dim))


def make_classical_demo(mu: float = 0.7) -> ClassicalSystem:
    """Packaged 2+1-dimensional instance with nonconstant coupling:

        k_ij = I, k_ab = [[1]], k_ia(x) = (0.3 sin x2, 0.3 cos x1)^T,
        V = 1/2 |x|^2, momentum level (mu).
    """
    n, m = 2, 1
    k_ij = constant_field(np.eye(2))
    k_ab = constant_field(np.array([[1.0]]))

    def kia_val(x):
        return np.array([[0.3 * np.sin(x[1])], [0.3 * np.cos(x[0])]])

    def kia_jac(x):
        out = np.zeros((2, 1, 2))
        out[0, 0, 1] = 0.3 * np.cos(x[1])
        out[1, 0, 0] = -0.3 * np.sin(x[0])
        return out

    k_ia = MatrixField(kia_val, kia_jac)
    pot = ScalarField(value=lambda x: 0.5 * float(x @ x), grad=lambda x: x)
    samples = np.array([[0.0, 0.0], [1.0, -1.0], [-2.0, 0.5], [3.0, 2.0]])
    sys = make_classical(k_ij, k_ia, k_ab, pot, base_dim=n,
                         sample_points=samples, name="classical-demo")
    mu_vec = np.array([mu])
    alg = sys.chart.algebra
    level = MomentumLevel(mu_vec, aligned_isotropy_split(alg, mu_vec, n_A=m))
    return ClassicalSystem(sys, level, k_ij, k_ia, k_ab, pot)
