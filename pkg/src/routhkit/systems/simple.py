"""Simple mechanical systems: kinetic-minus-potential Lagrangians in the
frame of their mechanical connection, where the mixed Hessian block
vanishes by construction.

The locked inertia tensor is the group block I(x) = c(x) h_ab, with h a
fixed ad-invariant form and c a positive scalar on the base; the
amended potential of a momentum level mu is V + 1/2 I^{ab} mu_a mu_b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import SpecError
from ..lagrangian import LagrangianSystem
from ..lie import GroupChart, aligned_isotropy_split
from ..routh import MomentumLevel
from .blocks import MatrixField, ScalarField, make_block_system


@dataclass(frozen=True)
class SimpleMechanicalSystem:
    system: LagrangianSystem
    level: MomentumLevel
    inertia: MatrixField
    potential: ScalarField

    def amended_potential(self, x: np.ndarray) -> float:
        mu = self.level.mu
        return float(self.potential.value(x) + 0.5 * mu @ np.linalg.inv(self.inertia.value(x)) @ mu)

    def amendment(self, x: np.ndarray) -> float:
        mu = self.level.mu
        return float(0.5 * mu @ np.linalg.inv(self.inertia.value(x)) @ mu)


def make_simple_mechanical(
    chart: GroupChart,
    base_dim: int,
    base_metric: MatrixField,
    h: np.ndarray,
    inertia_scale: ScalarField,
    potential: ScalarField,
    gauge: Optional[MatrixField] = None,
    mu: Optional[np.ndarray] = None,
    n_A: Optional[int] = None,
    sample_points: Optional[np.ndarray] = None,
    name: str = "simple-mechanical",
) -> SimpleMechanicalSystem:
    """Build L = 1/2 g_ij(x) v^i v^j + 1/2 c(x) h_ab v^a v^b - V(x) with
    the given gauge potential as mechanical connection.  ``h`` must be
    ad-invariant (e.g. any symmetric form for Abelian groups, a multiple
    of the Killing-orthogonal form for so(3))."""
    h = np.asarray(h, dtype=float)
    m = chart.dim

    def c_positive(x):
        val = inertia_scale.value(x)
        if val <= 0:
            raise SpecError("inertia scale must be positive on the sampled region")
        return val

    inertia = MatrixField(
        value=lambda x: c_positive(x) * h,
        jac=None if inertia_scale.grad is None else (
            lambda x: h[..., None] * inertia_scale.d(x)[None, None, :]
        ),
    )
    system = make_block_system(
        chart=chart,
        base_dim=base_dim,
        base_metric=base_metric,
        vertical_metric=inertia,
        potential=potential,
        gauge=gauge,
        sample_points=sample_points,
        name=name,
    )
    if mu is None:
        mu = np.zeros(m)
        n_A = m
    if n_A is None:
        raise SpecError("n_A must accompany mu")
    level = MomentumLevel(np.asarray(mu, dtype=float),
                          aligned_isotropy_split(chart.algebra, np.asarray(mu, dtype=float), n_A))
    return SimpleMechanicalSystem(system, level, inertia, potential)
