import numpy as np
import pytest

from mmloco.rom.params import RobotParams
from mmloco.sim.transform import (
    STANCE_LENGTH,
    T_TRANSFORM,
    TransformDirection,
    transform_sequence,
)


def stance_pose():
    return np.column_stack([np.zeros(4), np.zeros(4),
                            np.full(4, STANCE_LENGTH)])


def test_sequence_duration_and_endpoints():
    qk0 = stance_pose()
    fn, final = transform_sequence(qk0, TransformDirection.ToAir)
    np.testing.assert_allclose(fn(0.0), qk0)
    np.testing.assert_allclose(fn(T_TRANSFORM), final)
    # clamped outside [0, t_t]
    np.testing.assert_allclose(fn(-1.0), qk0)
    np.testing.assert_allclose(fn(T_TRANSFORM + 1.0), final)
    robot = RobotParams()
    assert np.all(final[:, 0] == pytest.approx(np.pi / 2))
    assert np.all(final[:, 2] == pytest.approx(robot.l_nominal))


def test_to_ground_reverses_to_air():
    """ToGround from the UAV pose visits ToAir's keyframes in reverse and
    returns to the standing pose."""
    from mmloco.sim.transform import PHASE_SPLIT

    qk0 = stance_pose()
    to_air, uav = transform_sequence(qk0, TransformDirection.ToAir)
    back, stand = transform_sequence(uav, TransformDirection.ToGround)
    np.testing.assert_allclose(stand, qk0, atol=1e-3)
    f1, f2 = PHASE_SPLIT
    # keyframes at the phase boundaries are the ToAir ones, reversed
    np.testing.assert_allclose(back(0.0), to_air(T_TRANSFORM), atol=1e-3)
    np.testing.assert_allclose(back(f1 * T_TRANSFORM),
                               to_air(f2 * T_TRANSFORM), atol=1e-3)
    np.testing.assert_allclose(back(f2 * T_TRANSFORM),
                               to_air(f1 * T_TRANSFORM), atol=1e-3)
    np.testing.assert_allclose(back(T_TRANSFORM), to_air(0.0), atol=1e-3)


def test_trajectory_is_continuous_and_rate_bounded():
    qk0 = stance_pose()
    fn, _ = transform_sequence(qk0, TransformDirection.ToAir)
    ts = np.linspace(0.0, T_TRANSFORM, 4001)
    prev = fn(ts[0])
    dt = ts[1] - ts[0]
    robot = RobotParams()
    for t in ts[1:]:
        cur = fn(t)
        rate = np.abs(cur - prev) / dt
        assert np.all(rate[:, :2] <= 8.0 + 1e-6)     # angle servo limit
        assert np.all(rate[:, 2] <= 0.8 + 1e-6)      # length servo limit
        assert np.all(cur[:, 2] >= robot.l_min - 1e-9)
        assert np.all(cur[:, 2] <= robot.l_max + 1e-9)
        prev = cur


def test_custom_duration_scales_sequence():
    qk0 = stance_pose()
    fn, final = transform_sequence(qk0, TransformDirection.ToAir, t_t=8.0)
    np.testing.assert_allclose(fn(8.0), final)
    mid_default, _ = transform_sequence(qk0, TransformDirection.ToAir)
    np.testing.assert_allclose(fn(4.0), mid_default(2.0))
