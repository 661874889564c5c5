"""Lie algebras by structure constants, group coordinate charts, isotropy
subalgebras of momenta, and the development ODE on a group.

Conventions (fixed throughout the package):

* structure constants C[c, a, b] satisfy [E_a, E_b] = C^c_ab E_c;
* the group acts on the left, and the fundamental field of E_a is the
  infinitesimal generator of left translation, so the bracket of two
  fundamental fields carries the opposite sign,
  [xi~, eta~] = -([xi, eta])~;
* adjoint(g) is the matrix A with Ad_g E_a = A[b, a] E_b;
* fundamental_coeffs(g) is the matrix K with E_a~ = K[b, a] d/dtheta^b.

User-supplied charts must match these sign conventions; the validation
helpers at the bottom check them by finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ChartError, DimensionError, SpecError
from .integrate import Trajectory, rk4


@dataclass(frozen=True)
class LieAlgebra:
    """A real Lie algebra given by structure constants C[c, a, b]."""

    structure_constants: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise DimensionError("structure constants must be an (m, m, m) array")
        object.__setattr__(self, "structure_constants", c)

    @property
    def dim(self) -> int:
        return self.structure_constants.shape[0]

    def check_antisymmetry(self) -> float:
        c = self.structure_constants
        return float(np.max(np.abs(c + np.swapaxes(c, 1, 2))))

    def check_jacobi(self) -> float:
        """Max violation of sum_e (C^e_ab C^d_ec + cyclic) = 0."""
        c = self.structure_constants
        term = np.einsum("eab,dec->dabc", c, c)
        total = term + np.einsum("dabc->dbca", term) + np.einsum("dabc->dcab", term)
        return float(np.max(np.abs(total)))

    def validate(self, tol: float = 1e-12) -> None:
        a = self.check_antisymmetry()
        j = self.check_jacobi()
        if a > tol:
            raise SpecError(f"structure constants are not antisymmetric (max {a:.3e})")
        if j > tol:
            raise SpecError(f"Jacobi identity violated (max {j:.3e})")


def bracket(alg: LieAlgebra, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """[xi, eta]^c = C^c_ab xi^a eta^b."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if xi.shape != (alg.dim,) or eta.shape != (alg.dim,):
        raise DimensionError(f"algebra vectors must have length {alg.dim}")
    return np.einsum("cab,a,b->c", alg.structure_constants, xi, eta)


def abelian_algebra(dim: int) -> LieAlgebra:
    return LieAlgebra(np.zeros((dim, dim, dim)), name=f"R^{dim}")


@dataclass(frozen=True)
class GroupChart:
    """Coordinate model of a Lie group.

    All group data is expressed in one fixed chart: multiplication,
    inversion, the adjoint matrices, and the coefficients K of the
    fundamental vector fields.  ``domain_ok`` may reject points near a
    chart boundary; ``exact_flow(xi, t, g0)``, when provided (matrix
    groups), computes the flow of the fundamental field exactly and is
    used only for cross-checks in tests.
    """

    algebra: LieAlgebra
    identity_coords: np.ndarray
    multiply: Callable[[np.ndarray, np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    fundamental_coeffs: Callable[[np.ndarray], np.ndarray]
    domain_ok: Callable[[np.ndarray], bool] = field(default=lambda theta: True)
    exact_flow: Optional[Callable[[np.ndarray, float, np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "identity_coords", np.asarray(self.identity_coords, dtype=float)
        )
        if self.identity_coords.shape != (self.algebra.dim,):
            raise DimensionError("identity coords must have length dim(g)")

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def frame(self, theta: np.ndarray) -> np.ndarray:
        """K(theta), raising ChartError when singular or out of domain."""
        if not self.domain_ok(theta):
            raise ChartError(f"chart point {theta} outside domain of {self.name or 'chart'}")
        K = self.fundamental_coeffs(theta)
        return K


@dataclass(frozen=True)
class IsotropySplit:
    """Split of the algebra basis adapted to the isotropy algebra of mu.

    ``basis_A`` spans g_mu (rows are vectors in the original basis),
    ``basis_alpha`` completes it to a full basis, ``change_of_basis`` has
    the adapted basis vectors as columns, and ``mu_adapted`` holds mu in
    the adapted dual basis.
    """

    mu: np.ndarray
    basis_A: np.ndarray
    basis_alpha: np.ndarray
    change_of_basis: np.ndarray
    mu_adapted: np.ndarray

    @property
    def n_A(self) -> int:
        return self.basis_A.shape[0]

    @property
    def n_alpha(self) -> int:
        return self.basis_alpha.shape[0]

    @property
    def dim(self) -> int:
        return self.n_A + self.n_alpha


def momentum_isotropy_matrix(alg: LieAlgebra, mu: np.ndarray) -> np.ndarray:
    """Matrix D with D[a, b] = C^c_ab mu_c; ker D = g_mu."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (alg.dim,):
        raise DimensionError(f"momentum covector must have length {alg.dim}")
    return np.einsum("cab,c->ab", alg.structure_constants, mu)


def adapted_structure_constants(alg: LieAlgebra, change_of_basis: np.ndarray) -> np.ndarray:
    """Structure constants in the basis given by the columns of P."""
    P = change_of_basis
    Pinv = np.linalg.inv(P)
    return np.einsum("dc,cab,aA,bB->dAB", Pinv, alg.structure_constants, P, P)


def isotropy_subalgebra(alg: LieAlgebra, mu: np.ndarray, tol: float = 1e-10) -> IsotropySplit:
    """Compute g_mu = {xi : xi^b C^c_ab mu_c = 0 for all a} by SVD.

    Singular values below ``tol`` times the largest one are treated as
    zero.  The kernel may be the whole algebra (e.g. any Abelian algebra,
    or momenta fixed by the coadjoint action).  The adapted basis is
    orthonormal; basis_alpha consists of the right singular vectors with
    the largest singular values.

    The subalgebra property guarantees C^gamma_AB = 0 in the adapted
    basis; this is re-verified numerically and a SpecError is raised if
    it fails (it cannot for exact structure constants).
    """
    mu = np.asarray(mu, dtype=float)
    D = momentum_isotropy_matrix(alg, mu)
    m = alg.dim
    _, svals, vt = np.linalg.svd(D)
    svals = np.concatenate([svals, np.zeros(m - len(svals))])
    cutoff = tol * (svals[0] if svals.size and svals[0] > 0 else 1.0)
    rank = int(np.sum(svals > cutoff))
    basis_alpha = vt[:rank]
    basis_A = vt[rank:]
    P = np.vstack([basis_A, basis_alpha]).T
    mu_adapted = mu @ P
    c_ad = adapted_structure_constants(alg, P)
    n_A = m - rank
    gamma_AB = c_ad[n_A:, :n_A, :n_A]
    worst = float(np.max(np.abs(gamma_AB))) if gamma_AB.size else 0.0
    if worst > 100 * tol * max(1.0, float(np.max(np.abs(alg.structure_constants)))):
        raise SpecError(
            f"adapted basis has C^gamma_AB != 0 (max {worst:.3e}); "
            "the isotropy split is not a subalgebra split at this tolerance"
        )
    return IsotropySplit(mu, basis_A, basis_alpha, P, mu_adapted)


def aligned_isotropy_split(alg: LieAlgebra, mu: np.ndarray, n_A: int, tol: float = 1e-10) -> IsotropySplit:
    """Isotropy split for a working basis whose first n_A vectors span g_mu.

    Built-in systems supply bases already adapted to their momentum; this
    checks the defining condition and the vanishing of C^gamma_AB rather
    than recomputing a basis.
    """
    mu = np.asarray(mu, dtype=float)
    m = alg.dim
    D = momentum_isotropy_matrix(alg, mu)
    resid = np.max(np.abs(D[:, :n_A])) if n_A else 0.0
    scale = max(1.0, float(np.max(np.abs(D))) if D.size else 1.0)
    if resid > tol * scale:
        raise SpecError(
            f"first {n_A} basis vectors do not annihilate mu (residual {resid:.3e})"
        )
    gamma_AB = alg.structure_constants[n_A:, :n_A, :n_A]
    if gamma_AB.size and np.max(np.abs(gamma_AB)) > tol:
        raise SpecError("working basis violates C^gamma_AB = 0")
    eye = np.eye(m)
    return IsotropySplit(mu, eye[:n_A], eye[n_A:], eye.copy(), mu.copy())


def develop(
    chart: GroupChart,
    xi_of_t: Callable[[float], np.ndarray],
    g0: np.ndarray,
    t_grid: Sequence[float],
) -> Trajectory:
    """Development of the algebra curve xi(t) into the group.

    Solves theta'(t) = K(theta) xi(t) with theta(t_grid[0]) = g0 in chart
    coordinates.  The solution g(t) satisfies theta(g'(t)) = xi(t) for
    the Maurer-Cartan form theta of the left action convention.  Chart
    exit (singular K or domain violation) aborts with the exit time.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    if g0.shape != (chart.dim,):
        raise DimensionError(f"g0 must have length {chart.dim}")

    def ode(t, theta):
        K = chart.frame(theta)
        return K @ np.asarray(xi_of_t(t), dtype=float)

    dt = float(np.min(np.diff(t_grid))) if len(t_grid) > 1 else 1.0
    traj = rk4(ode, g0, float(t_grid[0]), float(t_grid[-1]), dt)
    # rk4 lands on the same grid for uniform t_grid; resample otherwise
    if len(traj.times) != len(t_grid) or not np.allclose(traj.times, t_grid):
        states = np.vstack([np.interp(t_grid, traj.times, traj.states[:, k]) for k in range(chart.dim)]).T
        traj = Trajectory(t_grid, states)
    return traj


# ---------------------------------------------------------------------------
# chart validation (finite-difference checks of the sign conventions)

def _fd_theta(f, theta, h=1e-6):
    """Jacobian d f / d theta^k by central differences; f maps R^m -> array."""
    theta = np.asarray(theta, dtype=float)
    cols = []
    for k in range(theta.size):
        step = h * (1.0 + abs(theta[k]))
        tp = theta.copy(); tp[k] += step
        tm = theta.copy(); tm[k] -= step
        cols.append((np.asarray(f(tp)) - np.asarray(f(tm))) / (2 * step))
    return np.stack(cols, axis=-1)


def validate_chart(chart: GroupChart, points: np.ndarray, pairs: np.ndarray | None = None) -> dict:
    """Numerical residuals of the GroupChart contract at sample points.

    Returns a dict of max residuals: identity laws, adjoint at identity,
    adjoint homomorphism (on ``pairs``), frame invertibility margin,
    the fundamental-field bracket convention
    [Ea~, Eb~] = -C^c_ab Ec~, and the derivative identity
    Ea~(A^c_b) = C^c_ad A^d_b.
    """
    alg = chart.algebra
    m = chart.dim
    C = alg.structure_constants
    e = chart.identity_coords
    out = {
        "identity": 0.0,
        "adjoint_identity": float(np.max(np.abs(chart.adjoint(e) - np.eye(m)))),
        "adjoint_homomorphism": 0.0,
        "frame_min_sv": np.inf,
        "bracket_convention": 0.0,
        "adjoint_derivative": 0.0,
    }
    for theta in points:
        out["identity"] = max(
            out["identity"],
            float(np.max(np.abs(chart.multiply(e, theta) - theta))),
            float(np.max(np.abs(chart.multiply(theta, e) - theta))),
        )
        K = chart.fundamental_coeffs(theta)
        out["frame_min_sv"] = min(out["frame_min_sv"], float(np.linalg.svd(K, compute_uv=False)[-1]))
        # bracket of fundamental fields: [Ea~, Eb~]^d = Ea~(K^d_b) - Eb~(K^d_a)
        dK = _fd_theta(chart.fundamental_coeffs, theta)  # dK[d, a, k]
        lie_ab = np.einsum("ea,dbe->dab", K, dK) - np.einsum("eb,dae->dab", K, dK)
        expected = -np.einsum("cab,dc->dab", C, K)
        out["bracket_convention"] = max(out["bracket_convention"], float(np.max(np.abs(lie_ab - expected))))
        dA = _fd_theta(chart.adjoint, theta)  # dA[c, b, k]
        lhs = np.einsum("ea,cbe->cba", K, dA)      # Ea~(A^c_b)
        rhs = np.einsum("cad,db->cba", C, chart.adjoint(theta))
        out["adjoint_derivative"] = max(out["adjoint_derivative"], float(np.max(np.abs(lhs - rhs))))
    if pairs is not None:
        for g, h in pairs:
            lhs = chart.adjoint(chart.multiply(g, h))
            rhs = chart.adjoint(g) @ chart.adjoint(h)
            out["adjoint_homomorphism"] = max(out["adjoint_homomorphism"], float(np.max(np.abs(lhs - rhs))))
    return out
