"""routhkit: Routh reduction and reconstruction for regular Lagrangian
systems with Lie group symmetry on trivial principal bundles.

The toolkit covers the full reduction round trip: momentum level sets
and their implicit group velocities, the Routhian and the reduced
(Lagrange-Routh) dynamics on N_mu/G_mu, and reconstruction of full
trajectories through a principal connection on the level set (either
the mechanical or the vertical-lift connection) followed by development
in the isotropy group.
"""

from .bundle import (BundleConnection, FullState, curvature, from_quasi_velocities,
                     to_quasi_velocities, trivial_connection)
from .errors import (ChartError, DimensionError, DomainError, IntegrationError,
                     LevelSetError, RegularityError, RouthkitError, SpecError)
from .integrate import Trajectory, rk4
from .lagrangian import (HessianBlocks, LagrangianSystem, el_field, el_field_packed,
                         energy, hessian, momentum)
from .lie import (GroupChart, IsotropySplit, LieAlgebra, abelian_algebra,
                  aligned_isotropy_split, bracket, develop, isotropy_subalgebra)
from .reconstruct import (LevelConnectionKind, ReconstructionResult, UpsilonCoefficients,
                          VerticalPart, horizontal_lift, locked_inertia_reconstruction,
                          reconstruct, upsilon, vertical_part)
from .routh import (BarredCoefficients, MomentumLevel, ReducedState, barred_coefficients,
                    generalized_routh_residual, reduced_field, reduced_field_packed,
                    restricted_routhian, routhian, solve_level_set)

__version__ = "0.1.0"
