import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasegrad import equilibrium as eq
from phasegrad import graph
from phasegrad.graph import CouplingGraph, build_erdos_renyi
from phasegrad.rng import Xoshiro256StarStar

# two-node closed-form case: K=1, omega_c=(0.5,-0.5)
#   theta1* = arcsin(-0.5) = -pi/6, reduced Jacobian -cos(pi/6)
THETA1_STAR = -np.pi / 6
JTILDE = -np.cos(np.pi / 6)


def two_node() -> CouplingGraph:
    return CouplingGraph(2, (), (0,), (1,), edges=((0, 1, 1.0),))


def er(seed: int, n: int = 12) -> CouplingGraph:
    return build_erdos_renyi(n, 0.6, 5.0, Xoshiro256StarStar(seed))


def test_center_frequencies():
    assert np.allclose(eq.center_frequencies(np.array([1.0, 1.0, 1.0])), 0.0)
    v = np.array([0.5, -0.5])
    assert np.array_equal(eq.center_frequencies(v), v)
    rng = Xoshiro256StarStar(4)
    w = rng.normals(50, 0.3, 2.0)
    c = eq.center_frequencies(w)
    assert abs(c.sum()) <= 1e-14 * np.linalg.norm(w)


def test_center_rejects_empty():
    with pytest.raises(ValueError):
        eq.center_frequencies(np.array([]))


def test_residual_zero_at_origin():
    g = er(0)
    r = eq.residual(np.zeros(g.n), np.zeros(g.n), g)
    assert np.array_equal(r, np.zeros(g.n))


def test_residual_two_node_closed_form():
    g = two_node()
    theta = np.array([0.0, THETA1_STAR])
    r = eq.residual(theta, np.array([0.5, -0.5]), g)
    assert np.max(np.abs(r)) < 1e-15


def test_nudge_vanishes_at_target():
    g = er(1)
    theta = np.zeros(g.n)
    theta[g.output_nodes[0]] = 0.7
    theta[g.output_nodes[1]] = -0.2
    omega_c = eq.center_frequencies(Xoshiro256StarStar(2).normals(g.n, 0.0, 0.3))
    nudge = eq.NudgeSpec(beta=0.1, targets=(0.7, -0.2), outputs=g.output_nodes)
    assert np.allclose(eq.residual(theta, omega_c, g, nudge),
                       eq.residual(theta, omega_c, g), atol=0, rtol=0)


def test_nudge_validation():
    with pytest.raises(ValueError):
        eq.NudgeSpec(beta=0.0, targets=(0.0,), outputs=(1,))
    with pytest.raises(ValueError):
        eq.NudgeSpec(beta=0.1, targets=(0.0, 1.0), outputs=(1,))
    g = two_node()
    bad = eq.NudgeSpec(beta=0.1, targets=(0.0,), outputs=(0,))  # node 0 is hidden
    with pytest.raises(ValueError):
        eq.residual(np.zeros(2), np.zeros(2), g, bad)


def test_oscillator_state_invariants():
    with pytest.raises(ValueError):
        eq.OscillatorState(theta=np.array([0.1, 0.0]), omega=np.zeros(2))
    with pytest.raises(ValueError):
        eq.OscillatorState(theta=np.array([0.0, np.inf]), omega=np.zeros(2))
    st_ok = eq.OscillatorState(theta=np.array([0.0, 1.0]), omega=np.ones(2))
    assert st_ok.pin == 0


def test_jacobian_at_origin_is_negative_laplacian():
    g = er(3)
    jac = eq.jacobian(np.zeros(g.n), g)
    lap = graph.laplacian(g, g.edge_weights())
    assert np.max(np.abs(jac + lap)) <= 1e-13


def test_jacobian_symmetric_for_symmetric_coupling():
    g = er(4)
    theta = Xoshiro256StarStar(5).normals(g.n, 0.0, 1.0)
    theta[0] = 0.0
    jac = eq.jacobian(theta, g)
    assert np.max(np.abs(jac - jac.T)) <= 1e-14 * max(1.0, np.abs(jac).max())


def test_jacobian_rows_sum_to_zero_any_theta():
    g = er(6)
    theta = Xoshiro256StarStar(7).normals(g.n, 0.0, 2.0)
    jac = eq.jacobian(theta, g)
    assert np.max(np.abs(jac.sum(axis=1))) <= 1e-12


def test_jacobian_two_node_reduced():
    g = two_node()
    jac = eq.jacobian(np.array([0.0, THETA1_STAR]), g)
    red = graph.reduce(jac, 0)
    assert red.shape == (1, 1)
    assert abs(red[0, 0] - JTILDE) < 1e-15


def test_jacobian_nudge_hits_output_diagonal():
    g = er(8)
    theta = np.zeros(g.n)
    nudge = eq.NudgeSpec(beta=0.25, targets=(0.0, 0.0), outputs=g.output_nodes)
    free = eq.jacobian(theta, g)
    nudged = eq.jacobian(theta, g, nudge)
    diff = nudged - free
    expect = np.zeros((g.n, g.n))
    for o in g.output_nodes:
        expect[o, o] = -0.25
    assert np.array_equal(diff, expect)


def test_solve_trivial_all_equal():
    g = er(9)
    res = eq.solve(g, np.full(g.n, 1.7))
    assert res.converged
    assert res.iterations <= 1
    assert np.array_equal(res.theta_star, np.zeros(g.n))


def test_solve_two_node_closed_form():
    res = eq.solve(two_node(), np.array([0.5, -0.5]))
    assert res.converged
    assert abs(res.theta_star[1] - THETA1_STAR) <= 1e-12
    assert res.theta_star[0] == 0.0
    assert abs(res.jacobian_cond - 1.0) < 1e-12  # 1x1 reduced system


def test_solve_er_residual_tiny():
    for seed in range(5):
        g = er(seed)
        omega = Xoshiro256StarStar(100 + seed).normals(g.n, 0.0, 0.3)
        res = eq.solve(g, omega)
        assert res.converged
        assert res.residual_inf <= 1e-12
        assert res.jacobian_cond >= 1.0
        full = eq.residual(res.theta_star, eq.center_frequencies(omega), g)
        assert np.max(np.abs(full[1:])) <= 1e-12


def test_solve_idempotent():
    g = er(10)
    omega = Xoshiro256StarStar(11).normals(g.n, 0.0, 0.3)
    first = eq.solve(g, omega)
    again = eq.solve(g, omega, warm_start=first.theta_star)
    assert again.converged
    assert again.iterations <= 1
    assert np.max(np.abs(again.theta_star - first.theta_star)) <= 1e-12


def test_rotational_symmetry_of_residual():
    g = er(12)
    rng = Xoshiro256StarStar(13)
    theta = rng.normals(g.n, 0.0, 1.0)
    omega_c = eq.center_frequencies(rng.normals(g.n, 0.0, 0.3))
    base = eq.residual(theta, omega_c, g)
    shifted = eq.residual(theta + 2.31, omega_c, g)
    assert np.max(np.abs(base - shifted)) <= 1e-12


def test_solve_reports_nonconvergence():
    # sin(theta) = -2 has no solution: drift exceeds coupling
    g = two_node()
    res = eq.solve(g, np.array([2.0, -2.0]))
    assert not res.converged
    assert res.residual_inf > 1e-12


def test_nudged_solve_warm_start_is_cheap():
    g = er(14)
    omega = Xoshiro256StarStar(15).normals(g.n, 0.0, 0.3)
    free = eq.solve(g, omega)
    nudge = eq.NudgeSpec(beta=1e-4, targets=(0.0, np.pi), outputs=g.output_nodes)
    nudged = eq.solve(g, omega, nudge, warm_start=free.theta_star)
    assert nudged.converged
    assert nudged.iterations <= 3
    # the nudged equilibrium moved, but only a little
    delta = np.max(np.abs(nudged.theta_star - free.theta_star))
    assert 0 < delta < 1e-2


def test_solve_rejects_length_mismatch():
    with pytest.raises(ValueError):
        eq.solve(two_node(), np.zeros(3))


def test_condition_number_basics():
    assert eq.condition_number(np.eye(4)) == 1.0
    assert abs(eq.condition_number(np.diag([10.0, 1.0])) - 10.0) < 1e-12


def test_condition_number_matches_svd_oracle():
    rng = Xoshiro256StarStar(16)
    raw = np.array([[rng.normal() for _ in range(8)] for _ in range(8)])
    spd = raw @ raw.T + 8 * np.eye(8)
    ref = np.linalg.cond(spd, 2)
    assert abs(eq.condition_number(spd) - ref) <= 1e-8 * ref
    # asymmetric route
    ref2 = np.linalg.cond(raw, 2)
    assert abs(eq.condition_number(raw) - ref2) <= 1e-8 * ref2


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_solved_equilibria_have_definite_reduced_jacobian(seed):
    g = er(seed, n=10)
    omega = Xoshiro256StarStar(seed + 31337).normals(g.n, 0.0, 0.3)
    res = eq.solve(g, omega)
    assert res.converged
    assert res.residual_inf <= 1e-12
    jac = eq.jacobian(res.theta_star, g)
    gaps = [abs(res.theta_star[j] - res.theta_star[i]) for i, j, _ in g.edges]
    if max(gaps) < np.pi / 2:
        red = graph.reduce(jac, 0)
        assert np.all(np.linalg.eigvalsh(-red) > 0)
