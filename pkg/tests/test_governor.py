import numpy as np
import pytest

from mmloco.governor import (
    ConstraintEval,
    GovernorState,
    friction_constraints,
    govern,
    lyapunov_value,
    update,
)
from mmloco.rom.dynamics import BodyState, LegKinematics, RobotState
from mmloco.rom.params import GroundModel, RobotParams
from mmloco.sim.transform import STANCE_LENGTH


def linear_eval(A, b):
    """h_i(x) = b_i - a_i . x >= 0 (half-space constraints)."""
    A = np.atleast_2d(np.asarray(A, float))
    b = np.atleast_1d(np.asarray(b, float))

    def h(x):
        return b - A @ x

    def eval_fn(x_w, x_r):
        return ConstraintEval(h(x_w), h(x_r), -A)

    return eval_fn


def run_toy(gov, eval_fn, t=5.0, dt=1e-3, max_step=1e-3):
    for _ in range(int(t / dt)):
        gov = govern(gov, lambda x: eval_fn(x, gov.x_r), dt,
                     max_step=max_step)
    return gov


def p_projection(x_r, A, b, P):
    """Closed-form P-metric projection onto a single active half-space."""
    a = np.asarray(A, float).ravel()
    viol = a @ x_r - b
    Pinv_a = np.linalg.solve(P, a)
    return x_r - Pinv_a * viol / (a @ Pinv_a)


def test_2d_toy_converges_to_projection_identity_metric():
    A, b = np.array([[1.0, 1.0]]), np.array([1.0])
    gov = GovernorState(x_w=np.array([0.0, 0.0]),
                        x_r=np.array([1.5, 1.0]))
    gov = run_toy(gov, linear_eval(A, b))
    expected = p_projection(gov.x_r, A, b[0], gov.P)
    assert np.linalg.norm(gov.x_w - expected) < 1e-3


def test_2d_toy_converges_to_projection_scaled_metric():
    # for P proportional to the identity the P-metric projection coincides
    # with the Euclidean one the switching law realizes
    A, b = np.array([[1.0, 0.5]]), np.array([0.5])
    P = 3.0 * np.eye(2)
    gov = GovernorState(x_w=np.array([-0.2, 0.0]),
                        x_r=np.array([1.2, 0.8]), P=P)
    gov = run_toy(gov, linear_eval(A, b))
    expected = p_projection(gov.x_r, A, b[0], P)
    assert np.linalg.norm(gov.x_w - expected) < 1e-3


def test_2d_toy_reaches_constraint_surface_weighted_metric():
    # with anisotropic P the limit still lies on the active constraint
    A, b = np.array([[1.0, 0.5]]), np.array([0.5])
    P = np.diag([1.0, 4.0])
    gov = GovernorState(x_w=np.array([-0.2, 0.0]),
                        x_r=np.array([1.2, 0.8]), P=P)
    gov = run_toy(gov, linear_eval(A, b))
    assert abs(float((A @ gov.x_w)[0]) - b[0]) < 1e-3


def test_feasible_reference_reached_exactly():
    A, b = np.array([[1.0, 0.0]]), np.array([5.0])
    gov = GovernorState(x_w=np.array([0.0, 0.0]), x_r=np.array([1.0, -2.0]))
    gov = run_toy(gov, linear_eval(A, b), t=2.0)
    assert np.linalg.norm(gov.x_w - gov.x_r) < 1e-6


def test_feasible_path_is_pure_attraction():
    gov = GovernorState(x_w=np.zeros(2), x_r=np.array([1.0, 2.0]))
    c = ConstraintEval(np.array([0.5]), np.array([0.5]),
                       np.array([[1.0, 0.0]]))
    out = update(gov, c, 1e-3)
    expected = gov.x_w + 1e-3 * (gov.alpha_r + gov.alpha_t) * (gov.x_r - gov.x_w)
    np.testing.assert_allclose(out.x_w, expected, atol=1e-12)


def test_empty_constraints_are_pure_attraction():
    gov = GovernorState(x_w=np.zeros(3), x_r=np.ones(3))
    c = ConstraintEval(np.zeros(0), np.zeros(0), np.zeros((0, 3)))
    out = update(gov, c, 1e-3)
    expected = 1e-3 * (gov.alpha_r + gov.alpha_t) * np.ones(3)
    np.testing.assert_allclose(out.x_w, expected, atol=1e-12)


def test_fixed_point_at_reference():
    gov = GovernorState(x_w=np.array([0.3, 0.3]), x_r=np.array([0.3, 0.3]))
    c = ConstraintEval(np.array([0.1]), np.array([0.1]),
                       np.array([[1.0, 1.0]]))
    out = update(gov, c, 1e-3)
    np.testing.assert_allclose(out.x_w, gov.x_w, atol=1e-15)


def test_lyapunov_decreases_on_feasible_path():
    A, b = np.array([[1.0, 1.0]]), np.array([10.0])
    eval_fn = linear_eval(A, b)
    gov = GovernorState(x_w=np.zeros(2), x_r=np.array([2.0, 1.0]))
    prev = lyapunov_value(gov)
    for _ in range(200):
        gov = govern(gov, lambda x: eval_fn(x, gov.x_r), 1e-3, max_step=1e-2)
        cur = lyapunov_value(gov)
        assert cur <= prev + 1e-12
        prev = cur


def test_update_invariant_to_constraint_row_scaling():
    gov = GovernorState(x_w=np.array([0.8, 0.0]), x_r=np.array([2.0, 0.5]))
    A, b = np.array([[1.0, 0.2]]), np.array([1.0])
    h_w = b - A @ gov.x_w
    h_r = b - A @ gov.x_r
    one = update(gov, ConstraintEval(h_w, h_r, -A), 1e-3)
    # scaling the row leaves h-signs, nullspace span and the P-normalized
    # normal direction unchanged
    s = 7.3
    two = update(gov, ConstraintEval(s * h_w, s * h_r, -s * A), 1e-3)
    np.testing.assert_allclose(one.x_w, two.x_w, atol=1e-12)


def test_governor_state_validation():
    with pytest.raises(ValueError):
        GovernorState(np.zeros(2), np.zeros(3))
    with pytest.raises(ValueError):
        GovernorState(np.zeros(2), np.zeros(2), P=np.array([[1.0, 0], [0, -1.0]]))
    with pytest.raises(ValueError):
        GovernorState(np.zeros(2), np.zeros(2), alpha_r=0.0)
    with pytest.raises(ValueError):
        update(GovernorState(np.zeros(2), np.zeros(2)),
               ConstraintEval(np.zeros(0), np.zeros(0), np.zeros((0, 2))),
               dt=0.0)


# ---------------------------------------------------------------------------
# friction constraints on the ROM
# ---------------------------------------------------------------------------

def stance_state() -> tuple[RobotState, RobotParams, GroundModel]:
    robot, ground = RobotParams(), GroundModel()
    qk = np.column_stack([np.zeros(4), np.zeros(4),
                          np.full(4, STANCE_LENGTH)])
    z0 = STANCE_LENGTH - robot.m * robot.g / (4.0 * ground.k_gp)
    state = RobotState(BodyState(p_b=np.array([0.0, 0.0, z0])),
                       LegKinematics(qk))
    return state, robot, ground


def foot_refs(state, robot):
    from mmloco.rom import kinematics as kin
    return kin.foot_positions_body(state.legs.qk, robot.hip_offsets).ravel()


def test_airborne_constraints_empty():
    robot = RobotParams()
    state = RobotState(BodyState(p_b=np.array([0.0, 0.0, 5.0])))
    c = friction_constraints(state, np.zeros(12), GroundModel(), robot)
    assert c.h_w.size == 0 and c.grad_w.shape == (0, 12)


def test_stance_constraints_feasible_at_rest():
    state, robot, ground = stance_state()
    x = foot_refs(state, robot)
    c = friction_constraints(state, x, ground, robot)
    assert c.h_w.size == 12  # 4 feet x 3 rows
    assert c.h_w.min() > 0
    assert np.any(c.grad_w != 0.0)


def test_gradient_skip_flag():
    state, robot, ground = stance_state()
    x = foot_refs(state, robot)
    c = friction_constraints(state, x, ground, robot, gradients=False)
    assert np.all(c.grad_w == 0.0)
    full = friction_constraints(state, x, ground, robot)
    np.testing.assert_allclose(c.h_w, full.h_w, atol=1e-12)


def test_aggressive_lateral_reference_violates_ungoverned():
    """A fast commanded lateral slip exceeds the viscous margin; the same
    reference is feasible when rate-limited by the governor."""
    state, robot, ground = stance_state()
    x = foot_refs(state, robot)
    x_fast = x.copy()
    x_fast[1::3] += 0.05   # 5 cm sideways jump in one tick
    c = friction_constraints(state, x_fast, ground, robot)
    assert c.h_w.min() < -1e-3
    # small governed step along the same direction stays feasible
    x_slow = x + (x_fast - x) * 1e-3
    c2 = friction_constraints(state, x_slow, ground, robot)
    assert c2.h_w.min() >= -1e-3
