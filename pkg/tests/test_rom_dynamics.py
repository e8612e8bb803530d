import numpy as np
import pytest

from mmloco.rom import kinematics as kin
from mmloco.rom.dynamics import (
    BodyState,
    ForceSet,
    LegKinematics,
    RobotState,
    Simulator,
    generalized_forces,
    ground_reaction,
    ground_reaction_batch,
    mass_matrix,
)
from mmloco.rom.params import GroundModel, RobotParams
from mmloco.rom import _fast
from mmloco.sim.transform import STANCE_LENGTH


def _stance_state(robot: RobotParams, ground: GroundModel) -> RobotState:
    qk = np.column_stack([np.zeros(4), np.zeros(4),
                          np.full(4, STANCE_LENGTH)])
    z0 = STANCE_LENGTH - robot.m * robot.g / (4.0 * ground.k_gp)
    return RobotState(BodyState(p_b=np.array([0.0, 0.0, z0])),
                      LegKinematics(qk))


def total_energy(state: RobotState, robot: RobotParams) -> float:
    b = state.body
    H = kin.euler_rate_matrix(b.theta_b)
    om = H @ b.omega_b
    ke = 0.5 * robot.m * b.v_b @ b.v_b + 0.5 * om @ robot.inertia @ om
    return float(ke + robot.m * robot.g * b.p_b[2])


def test_free_tumble_energy_drift():
    robot = RobotParams()
    sim = Simulator(robot, use_fast=False)
    state = RobotState(
        BodyState(p_b=np.array([0.0, 0.0, 600.0]),
                  v_b=np.array([0.5, -0.3, 0.2]),
                  omega_b=np.array([0.05, 0.03, 2.0])))
    e0 = total_energy(state, robot)
    for _ in range(10_000):
        state = sim.step(state, 1e-3)
    drift = abs(total_energy(state, robot) - e0) / abs(e0)
    assert drift < 1e-6


def test_free_fall_matches_closed_form():
    robot = RobotParams()
    sim = Simulator(robot)
    z0 = 100.0
    state = RobotState(BodyState(p_b=np.array([0.0, 0.0, z0])))
    n, dt = 1000, 1e-3
    for _ in range(n):
        state = sim.step(state, dt)
    expected = z0 - 0.5 * robot.g * (n * dt) ** 2
    assert abs(state.body.p_b[2] - expected) < 1e-8


def test_static_penetration_matches_spring_balance():
    robot, ground = RobotParams(), GroundModel()
    sim = Simulator(robot, ground)
    state = _stance_state(robot, ground)
    qk0 = state.legs.qk.copy()
    for _ in range(2000):
        state = sim.step(state, 1e-3, qk_target=qk0)
    feet_z = (state.body.p_b + kin.foot_positions_body(
        state.legs.qk, robot.hip_offsets)
        @ kin.rotation_matrix(state.body.theta_b).T)[:, 2]
    expected = robot.m * robot.g / (4.0 * ground.k_gp)
    assert np.all(np.abs(-feet_z - expected) < 0.01 * expected)


def test_ground_never_pulls_and_is_zero_above_surface():
    model = GroundModel()
    assert np.all(ground_reaction(np.array([0.0, 0, 0.01]),
                                  np.zeros(3), model) == 0.0)
    # fast upward foot motion: damping would make fz negative; clamped
    f = ground_reaction(np.array([0.0, 0, -1e-4]),
                        np.array([0.0, 0, 5.0]), model)
    assert np.all(f == 0.0)
    f = ground_reaction(np.array([0.0, 0, -1e-3]), np.zeros(3), model)
    assert f[2] == pytest.approx(model.k_gp * 1e-3)


def test_ground_reaction_batch_matches_scalar():
    model = GroundModel()
    rng = np.random.default_rng(3)
    pos = rng.normal(0, 0.02, (50, 3))
    vel = rng.normal(0, 0.5, (50, 3))
    surf = np.zeros(50)
    batch = ground_reaction_batch(pos, vel, model, surf)
    for i in range(50):
        np.testing.assert_allclose(
            batch[i], ground_reaction(pos[i], vel[i], model), atol=1e-12)


def test_smoothed_friction_coefficient_never_exceeds_mu_c():
    model = GroundModel()
    v = np.linspace(-2.0, 2.0, 4001)
    strib = model.mu_c + (model.mu_s - model.mu_c) * np.exp(
        -(v * v) / model.v_s**2)
    mu_eff = strib * np.abs(np.tanh(v / model.v_t))
    assert np.all(mu_eff <= model.mu_c + 1e-12)


def _fd_generalized(body, legs, forces, robot, eps=1e-6):
    """Finite-difference u[k] = sum_i f_i . d p_i / d q_k."""
    feet_b = kin.foot_positions_body(legs.qk, robot.hip_offsets)
    thr_b, _ = kin.thruster_points_body(legs.qk, robot.hip_offsets,
                                        robot.thruster_offset)

    def world_points(p, theta):
        R = kin.rotation_matrix(theta)
        return p + feet_b @ R.T, p + thr_b @ R.T

    q = np.concatenate([body.p_b, body.theta_b])
    u = np.zeros(6)
    for k in range(6):
        qp, qm = q.copy(), q.copy()
        qp[k] += eps
        qm[k] -= eps
        fp_p, tp_p = world_points(qp[:3], qp[3:])
        fp_m, tp_m = world_points(qm[:3], qm[3:])
        u[k] = (np.sum(forces.f_g * (fp_p - fp_m))
                + np.sum(forces.f_t * (tp_p - tp_m))) / (2 * eps)
    return u


def _random_force_state(rng, robot):
    body = BodyState(p_b=rng.normal(0, 1.0, 3),
                     theta_b=rng.uniform(-0.8, 0.8, 3))
    legs = LegKinematics(np.column_stack([
        rng.uniform(-1.0, 1.5, 4), rng.uniform(-0.5, 0.5, 4),
        rng.uniform(robot.l_min, robot.l_max, 4)]))
    forces = ForceSet(rng.normal(0, 20.0, (4, 3)), rng.normal(0, 10.0, (4, 3)))
    return body, legs, forces


@pytest.mark.parametrize("seed", [0, 1])
def test_generalized_forces_match_fd_jacobians(seed):
    robot = RobotParams()
    rng = np.random.default_rng(seed)
    for _ in range(100):
        body, legs, forces = _random_force_state(rng, robot)
        u = generalized_forces(body, legs, forces, robot)
        u_fd = _fd_generalized(body, legs, forces, robot)
        denom = max(np.linalg.norm(u_fd), 1.0)
        assert np.linalg.norm(u - u_fd) / denom < 1e-5


def test_mass_matrix_spd_and_block_structure():
    robot = RobotParams()
    body = BodyState(theta_b=np.array([0.2, -0.3, 0.7]))
    M = mass_matrix(body, robot)
    np.testing.assert_allclose(M[:3, :3], robot.m * np.eye(3))
    assert np.all(np.linalg.eigvalsh(0.5 * (M + M.T)) > 0)


@pytest.mark.skipif(not _fast.HAVE_NUMBA, reason="numba not installed")
def test_fast_path_matches_reference():
    robot, ground = RobotParams(), GroundModel()
    s_fast = Simulator(robot, ground, use_fast=True)
    s_ref = Simulator(robot, ground, use_fast=False)
    a = _stance_state(robot, ground)
    a.body.v_b[:] = [0.3, -0.1, 0.0]
    b = a.copy()
    qk_tgt = a.legs.qk + np.array([0.1, 0.05, -0.02])
    thr = np.array([2.0, 1.0, 1.5, 0.5])
    for _ in range(100):
        a = s_fast.step(a, 1e-3, thrusts=thr, qk_target=qk_tgt)
        b = s_ref.step(b, 1e-3, thrusts=thr, qk_target=qk_tgt)
    np.testing.assert_allclose(a.body.p_b, b.body.p_b, atol=1e-10)
    np.testing.assert_allclose(a.body.v_b, b.body.v_b, atol=1e-9)
    np.testing.assert_allclose(a.body.omega_b, b.body.omega_b, atol=1e-8)
    assert s_fast.last_power == pytest.approx(s_ref.last_power, rel=1e-8,
                                              abs=1e-10)


def test_step_validates_inputs():
    sim = Simulator()
    state = RobotState(BodyState(p_b=np.array([0.0, 0.0, 5.0])))
    with pytest.raises(ValueError):
        sim.step(state, 0.0)
    with pytest.raises(ValueError):
        sim.step(state, 0.02)
