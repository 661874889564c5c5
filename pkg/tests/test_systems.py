import logging

import numpy as np
import pytest

from routhkit.bundle import FullState
from routhkit.errors import SpecError
from routhkit.integrate import rk4
from routhkit.lagrangian import el_field_packed, hessian, invariance_residual, momentum
from routhkit.routh import solve_level_set
from routhkit.systems import (SE2Initial, WongSpec, h_norm, make_se2,
                              so3_product_chart, wong_field_packed)

from helpers import coordinate_el_rhs, se2_coordinate_lagrangian

A, MU = 0.5, 0.3


# ---------------------------------------------------------------------------
# SE(2)

def test_make_se2_rejects_unit_coupling():
    with pytest.raises(SpecError):
        make_se2(1.0, MU)
    with pytest.raises(SpecError):
        make_se2(-1.0, MU)


def test_se2_closed_form_satisfies_coordinate_el():
    # independent check of the reference solution: plug it into the
    # brute-force coordinate Euler-Lagrange equations
    se2 = make_se2(A, MU)
    ic = SE2Initial(x0=0.1, xdot0=0.7, y0=-0.2, thetadot0=1.3)
    lag = se2_coordinate_lagrangian(A)
    h = 1e-4
    for t in (0.0, 0.7, 2.3):
        ts = np.array([t - h, t, t + h])
        q3 = se2.closed_form(ts, ic)
        q = q3[1]
        qdot = (q3[2] - q3[0]) / (2 * h)
        qddot = (q3[2] - 2 * q3[1] + q3[0]) / (h * h)
        oracle = coordinate_el_rhs(lag, q, qdot)
        assert np.max(np.abs(qddot - oracle)) < 1e-5


def test_se2_initial_constants(se2):
    ic = SE2Initial(thetadot0=1.2, y0=0.4)
    c = se2.derived_constants(ic)
    assert c["ydot0"] == 1.0 - A * 1.2
    assert c["zdot0"] == MU
    assert c["z0"] == MU * 0.4 + A * c["ydot0"] + 1.2
    assert c["theta0"] == 0.0
    st = se2.initial_state(ic)
    assert np.max(np.abs(momentum(se2.system, st) - se2.level.mu)) < 1e-12


def test_se2_closed_form_consistency(se2):
    # reduced closed form is the (z', theta) shadow of the full one
    ic = SE2Initial(thetadot0=0.9, y0=0.3)
    t = np.linspace(0, 5, 101)
    cf = se2.closed_form(t, ic)
    rcf = se2.reduced_closed_form(t, ic)
    zp = cf[:, 2] - MU * cf[:, 1]
    assert np.max(np.abs(zp - rcf[:, 0])) < 1e-12
    assert np.max(np.abs(cf[:, 3] - rcf[:, 1])) < 1e-12


def test_se2_full_integration_matches_closed_form(se2):
    ic = SE2Initial()
    st0 = se2.initial_state(ic)
    traj = rk4(el_field_packed(se2.system), st0.pack(), 0.0, 10.0, 1e-3)
    cf = se2.closed_form(traj.times, ic)
    ref = np.column_stack([cf[:, 0], se2.to_chart(cf[:, 1:])])
    assert np.max(np.abs(traj.states[:, :4] - ref)) <= 1e-6


def test_se2_angle_warning(se2, caplog):
    from routhkit.pipelines import simulate_full
    ic = SE2Initial()
    st0 = se2.initial_state(ic)
    with caplog.at_level(logging.WARNING, logger="routhkit"):
        simulate_full(se2.system, st0, 0.0, 4.0, 1e-2, diagnostics=False)
    assert any("unwrapped" in rec.message for rec in caplog.records)


# ---------------------------------------------------------------------------
# Wong

def test_wong_spec_rejects_bad_h():
    chart = so3_product_chart()
    import routhkit.systems as S
    with pytest.raises(SpecError):
        WongSpec(chart.algebra, 2, S.constant_field(np.eye(2)),
                 np.diag([1.0, 2.0, 3.0]), S.constant_field(np.zeros((3, 2))))


def test_wong_field_flat_free_case(rng):
    import routhkit.systems as S
    chart = so3_product_chart()
    spec = WongSpec(chart.algebra, 2, S.constant_field(np.eye(2)), np.eye(3),
                    S.constant_field(np.zeros((3, 2))))
    y0 = np.concatenate([np.zeros(2), [0.3, -0.2], [0.1, 0.2, 0.05]])
    traj = rk4(wong_field_packed(spec), y0, 0.0, 5.0, 1e-2)
    assert np.max(np.abs(traj.states[:, 2:4] - y0[2:4])) < 1e-12
    assert np.max(np.abs(traj.states[:, 4:] - y0[4:])) < 1e-12
    assert np.max(np.abs(traj.final_state[:2] - 5.0 * y0[2:4])) < 1e-10


def test_wong_h_norm_conserved(wong, rng):
    w0 = wong.wong_state(FullState(np.zeros(2), np.zeros(3), np.array([0.3, 0.2]),
                                   solve_level_set(wong.system, wong.level, np.zeros(2),
                                                   np.zeros(3), np.array([0.3, 0.2]))))
    traj = rk4(wong_field_packed(wong.spec), w0, 0.0, 10.0, 1e-3)
    norms = [h_norm(wong.spec, traj.states[k, 4:]) for k in range(0, len(traj), 500)]
    assert max(abs(v - norms[0]) for v in norms) <= 1e-8


def test_wong_two_route_equivalence(wong, rng):
    # generic Euler-Lagrange integration mapped through w = Abar v
    # reproduces the direct Wong equations
    x0 = np.array([0.2, -0.3])
    th0 = np.array([0.1, 0.4, -0.25])
    vb0 = np.array([0.3, 0.25])
    vg0 = solve_level_set(wong.system, wong.level, x0, th0, vb0)
    st0 = FullState(x0, th0, vb0, vg0)
    full = rk4(el_field_packed(wong.system), st0.pack(), 0.0, 3.0, 1e-3)
    direct = rk4(wong_field_packed(wong.spec), wong.wong_state(st0), 0.0, 3.0, 1e-3)
    sub = range(0, len(full), 100)
    worst = 0.0
    for k in sub:
        st = FullState.unpack(full.states[k], 2, 3)
        worst = max(worst, float(np.max(np.abs(wong.wong_state(st) - direct.states[k]))))
    assert worst <= 1e-6


def test_wong_invariance_and_momentum(wong, rng):
    st = FullState(rng.normal(size=2), rng.normal(scale=0.3, size=3),
                   rng.normal(size=2), rng.normal(scale=0.2, size=3))
    assert np.max(np.abs(invariance_residual(wong.system, st))) < 1e-12
    assert np.allclose(momentum(wong.system, st), wong.spec.h @ st.v_group)


# ---------------------------------------------------------------------------
# classical

def test_classical_demo_connection_is_mechanical(classical, rng):
    # Lambda = k^{ab} k_ib and the mixed Hessian block vanishes
    x = rng.normal(size=2)
    lam = classical.system.connection.coeffs(x, np.zeros(1))
    k_ia = classical.k_ia.value(x)
    kinv = np.linalg.inv(classical.k_ab.value(x))
    assert np.max(np.abs(lam - kinv @ k_ia.T)) < 1e-12
    st = FullState(x, np.zeros(1), rng.normal(size=2), rng.normal(size=1))
    assert np.max(np.abs(hessian(classical.system, st).g_ia)) == 0.0


def test_classical_decoupled_when_no_coupling():
    import routhkit.systems as S
    pot = S.ScalarField(lambda x: 0.5 * float(x @ x), lambda x: x)
    sys = S.make_classical(np.diag([2.0, 1.0]), np.zeros((2, 1)), np.array([[3.0]]),
                           pot, base_dim=2)
    x = np.array([0.3, -0.2])
    assert np.max(np.abs(sys.connection.coeffs(x, np.zeros(1)))) == 0.0
    from routhkit.lie import aligned_isotropy_split
    from routhkit.routh import MomentumLevel, restricted_routhian
    mu = np.array([0.9])
    level = MomentumLevel(mu, aligned_isotropy_split(sys.chart.algebra, mu, 1))
    v = np.array([0.4, 0.1])
    expected = 0.5 * v @ np.diag([2.0, 1.0]) @ v - 0.5 * float(x @ x) - 0.5 * 0.9 ** 2 / 3.0
    assert abs(restricted_routhian(sys, level, x, np.zeros(1), v) - expected) < 1e-12


def test_classical_rejects_singular_kab():
    import routhkit.systems as S
    pot = S.ScalarField(lambda x: 0.0, lambda x: np.zeros(2))
    with pytest.raises(SpecError):
        S.make_classical(np.eye(2), np.zeros((2, 1)), np.array([[0.0]]), pot, base_dim=2)


def test_simple_mechanical_isometry_identities(wong, rng):
    # Ea~(g_ij) = 0 and Ea~(g_bc) + C^d_ab g_cd + C^d_ac g_bd = 0 by
    # finite differences along the fundamental flows
    sys = wong.system
    chart = sys.chart
    C = chart.algebra.structure_constants
    h = 1e-6
    x = rng.normal(scale=0.4, size=2)
    th = rng.normal(scale=0.3, size=3)
    K = chart.fundamental_coeffs(th)
    st = FullState(x, th, np.zeros(2), np.zeros(3))
    H0 = hessian(sys, st)
    for a in range(3):
        thp = th + h * K[:, a]
        thm = th - h * K[:, a]
        Hp = hessian(sys, FullState(x, thp, np.zeros(2), np.zeros(3)))
        Hm = hessian(sys, FullState(x, thm, np.zeros(2), np.zeros(3)))
        dgij = (Hp.g_ij - Hm.g_ij) / (2 * h)
        dgbc = (Hp.g_ab - Hm.g_ab) / (2 * h)
        assert np.max(np.abs(dgij)) < 1e-9
        corr = (np.einsum("db,cd->bc", C[:, a, :], H0.g_ab)
                + np.einsum("dc,bd->bc", C[:, a, :], H0.g_ab))
        assert np.max(np.abs(dgbc + corr)) < 1e-9


def test_amended_potential_helpers(rng):
    import routhkit.systems as S
    chart = so3_product_chart()
    gm = S.MatrixField(lambda x: np.eye(1), lambda x: np.zeros((1, 1, 1)))
    cscale = S.ScalarField(lambda x: 2.0, lambda x: np.zeros(1))
    pot = S.ScalarField(lambda x: float(x[0] ** 2), lambda x: np.array([2 * x[0]]))
    sm = S.make_simple_mechanical(chart, 1, gm, np.eye(3), cscale, pot,
                                  mu=np.array([0.4, 0.0, 0.0]), n_A=1,
                                  sample_points=np.array([[0.0], [1.0]]))
    x = np.array([0.7])
    assert abs(sm.amendment(x) - 0.5 * 0.4 ** 2 / 2.0) < 1e-14
    assert abs(sm.amended_potential(x) - (0.49 + 0.04)) < 1e-14
