"""Wong systems: geodesic flow of an invariant metric whose vertical
part comes from a bi-invariant metric on the group.

The reduced dynamics of the geodesic Lagrangian

    L = 1/2 g_ij(x) v^i v^j + 1/2 h_ab w^a w^b,      w = Abar(theta) v_group,

are the classic charged-particle equations

    xddot^i + Gamma^i_jk xdot^j xdot^k = g^{im} h_bc K^c_lm xdot^l w^b,
    wdot^a + gamma^a_jb xdot^j w^b = 0,     gamma^b_ia = gamma^c_i C^b_ac,

with K^a_ij the gauge field strength of gamma.  ``wong_field`` integrates
these directly on (x, xdot, w); the generic reduction of the same
Lagrangian must reproduce its trajectories, which is the packaged
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..bundle import FullState
from ..errors import DimensionError, SpecError
from ..lagrangian import LagrangianSystem
from ..lie import GroupChart, LieAlgebra, aligned_isotropy_split
from ..routh import MomentumLevel
from .blocks import (MatrixField, constant_field, gauge_field_strength,
                     make_block_system, zero_potential)
from .charts import so3_product_chart


@dataclass(frozen=True)
class WongSpec:
    """Data of a Wong system: base metric (with Christoffel symbols from
    its jacobian), constant bi-invariant vertical coefficients h_ab, and
    the gauge potential gamma[a, i](x)."""

    algebra: LieAlgebra
    base_dim: int
    base_metric: MatrixField
    h: np.ndarray
    gamma: MatrixField

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        object.__setattr__(self, "h", h)
        C = self.algebra.structure_constants
        if h.shape != (self.algebra.dim, self.algebra.dim):
            raise DimensionError("h must be m x m")
        if np.max(np.abs(h - h.T)) > 1e-12:
            raise SpecError("h must be symmetric")
        skew = np.einsum("dbc,ad->abc", C, h) + np.einsum("dac,bd->abc", C, h)
        if np.max(np.abs(skew)) > 1e-10:
            raise SpecError("h violates the skew condition h_ad C^d_bc + h_bd C^d_ac = 0")

    def christoffel(self, x: np.ndarray) -> np.ndarray:
        """Gamma^i_jk of the base metric."""
        g = self.base_metric.value(x)
        dg = self.base_metric.d(x)  # dg[i, j, k] = d g_ij / d x^k
        ginv = np.linalg.inv(g)
        # 1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk)
        sym = np.einsum("lkj->ljk", dg) + dg - np.einsum("jkl->ljk", dg)
        return 0.5 * np.einsum("il,ljk->ijk", ginv, sym)

    def field_strength(self, x: np.ndarray) -> np.ndarray:
        return gauge_field_strength(self.gamma, self.algebra.structure_constants, x)


def wong_field(spec: WongSpec, state: np.ndarray) -> np.ndarray:
    """RHS of Wong's equations on the packed state (x, xdot, w)."""
    n, m = spec.base_dim, spec.algebra.dim
    state = np.asarray(state, dtype=float)
    if state.size != 2 * n + m:
        raise DimensionError(f"state must have length {2 * n + m}")
    x, xdot, w = state[:n], state[n:2 * n], state[2 * n:]
    g = spec.base_metric.value(x)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SpecError("base metric singular") from exc
    Gamma = spec.christoffel(x)
    K = spec.field_strength(x)
    C = spec.algebra.structure_constants
    gam = spec.gamma.value(x)
    force = np.einsum("im,bc,clm,l,b->i", ginv, spec.h, K, xdot, w)
    xddot = -np.einsum("ijk,j,k->i", Gamma, xdot, xdot) + force
    # wdot^a = -gamma^a_ib xdot^i w^b with gamma^a_ib = C^a_bc gamma^c_i
    wdot = -np.einsum("abc,ci,i,b->a", C, gam, xdot, w)
    return np.concatenate([xdot, xddot, wdot])


def wong_field_packed(spec: WongSpec):
    return lambda t, y: wong_field(spec, y)


def h_norm(spec: WongSpec, w: np.ndarray) -> float:
    """Conserved quantity h_ab w^a w^b."""
    return float(w @ spec.h @ w)


@dataclass(frozen=True)
class WongSystem:
    """Packaged Wong instance: the spec, the equivalent Lagrangian system
    on S x G, and its momentum level."""

    spec: WongSpec
    system: LagrangianSystem
    level: MomentumLevel

    def w_from_state(self, state: FullState) -> np.ndarray:
        """Invariant-frame velocity components w = Abar(theta) v_group."""
        A = self.system.chart.adjoint(state.theta)
        return np.linalg.solve(A, state.v_group)

    def wong_state(self, state: FullState) -> np.ndarray:
        return np.concatenate([state.x, state.v_base, self.w_from_state(state)])


def make_wong(
    chart: GroupChart,
    base_dim: int,
    base_metric: MatrixField,
    h: np.ndarray,
    gamma: MatrixField,
    mu: np.ndarray,
    n_A: int,
    sample_points: Optional[np.ndarray] = None,
    name: str = "wong",
) -> WongSystem:
    """Assemble a Wong system and its generic Lagrangian counterpart.

    ``mu`` must be adapted to the chart: its isotropy algebra spanned by
    the first ``n_A`` basis vectors (checked)."""
    spec = WongSpec(chart.algebra, base_dim, base_metric, h, gamma)
    system = make_block_system(
        chart=chart,
        base_dim=base_dim,
        base_metric=base_metric,
        vertical_metric=constant_field(spec.h),
        potential=zero_potential(base_dim),
        gauge=gamma,
        sample_points=sample_points,
        name=name,
    )
    mu = np.asarray(mu, dtype=float)
    level = MomentumLevel(mu, aligned_isotropy_split(chart.algebra, mu, n_A))
    return WongSystem(spec, system, level)


def make_wong_demo(mu1: float = 0.12) -> WongSystem:
    """Packaged instance: 2D base, so(3) structure constants in the
    cyclic basis with h = I (bi-invariant), bounded trig metric and
    gauge potential, momentum along the isotropy-aligned first dual
    basis vector (z angular momentum)."""
    chart = so3_product_chart()

    def g_val(x):
        return np.array([
            [1.0 + 0.2 * np.sin(x[1]), 0.0],
            [0.0, 1.0 + 0.2 * np.cos(x[0])],
        ])

    def g_jac(x):
        out = np.zeros((2, 2, 2))
        out[0, 0, 1] = 0.2 * np.cos(x[1])
        out[1, 1, 0] = -0.2 * np.sin(x[0])
        return out

    def gamma_val(x):
        return np.array([
            [0.2 * np.sin(x[1]), 0.0],
            [0.0, 0.2 * np.sin(x[0])],
            [0.15, 0.0],
        ])

    def gamma_jac(x):
        out = np.zeros((3, 2, 2))
        out[0, 0, 1] = 0.2 * np.cos(x[1])
        out[1, 1, 0] = 0.2 * np.cos(x[0])
        return out

    samples = np.array([[0.0, 0.0], [1.0, -0.5], [-1.5, 2.0], [2.5, 1.0]])
    return make_wong(
        chart=chart,
        base_dim=2,
        base_metric=MatrixField(g_val, g_jac),
        h=np.eye(3),
        gamma=MatrixField(gamma_val, gamma_jac),
        mu=np.array([mu1, 0.0, 0.0]),
        n_A=1,
        sample_points=samples,
        name="wong",
    )
