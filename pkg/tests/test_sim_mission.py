import numpy as np
import pytest

from mmloco.calibrate import _flat_env, _mode_change_plan, walk_rollout
from mmloco.planner import CostModel, EdgeKind, ModeTag
from mmloco.planner.search import MissionPlan
from mmloco.sim import MissionParams, run_mission
from mmloco.sim.mission import CSV_HEADER, write_ledger_json, write_trajectory_csv


EPS_H = 1e-3


def test_plan_must_start_walking():
    pos = np.array([[1.0, 5.0, 2.0], [5.0, 5.0, 2.0]])
    plan = MissionPlan([0, 1], pos, [ModeTag.Flying, ModeTag.Flying],
                       [EdgeKind.Fly], [100.0], 100.0)
    with pytest.raises(ValueError):
        run_mission(plan, _flat_env(), CostModel(), MissionParams())


@pytest.mark.slow
def test_straight_walk_reaches_goal_without_violations():
    log = walk_rollout(5.0)
    assert log.success
    final = np.asarray(log.rows[-1][1:4], dtype=float)
    assert np.linalg.norm(final[:2] - [6.0, 5.0]) <= 0.15
    assert log.min_h_w >= -EPS_H
    assert log.n_transforms == 0
    assert log.total_realized > 0


@pytest.mark.slow
def test_mode_change_mission(tmp_path):
    model = CostModel(c_walk_per_m=21.0)
    plan = _mode_change_plan(model)
    log = run_mission(plan, _flat_env(), model, MissionParams())
    assert log.success
    assert log.n_transforms == 2
    assert log.final_error < 0.3
    assert log.min_h_w >= -EPS_H
    kinds = [s["kind"] for s in log.segments]
    assert kinds == ["Transition", "Fly", "Transition"]
    assert log.waypoint_times == sorted(log.waypoint_times)
    # the mode timeline walks through the full cycle
    modes = [m for _, m in log.mode_timeline]
    assert modes[0] == "Walking"
    assert "Flying" in modes and "TransformToGround" in modes

    csv = tmp_path / "traj.csv"
    write_trajectory_csv(log, csv)
    lines = csv.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines[1].split(",")) == len(CSV_HEADER.split(","))
    ledger = tmp_path / "ledger.json"
    write_ledger_json(log, ledger)
    assert "total_realized_J" in ledger.read_text()


@pytest.mark.slow
def test_aerial_waypoints_tracked():
    model = CostModel(c_walk_per_m=21.0)
    pos = np.array([[1.0, 5.0, 0.0], [1.0, 5.0, 2.0], [5.0, 7.0, 2.5],
                    [9.0, 5.0, 2.0], [9.0, 5.0, 0.0]])
    plan = MissionPlan(
        [0, 1, 2, 3, 4], pos,
        [ModeTag.Walking, ModeTag.Flying, ModeTag.Flying, ModeTag.Flying,
         ModeTag.Walking],
        [EdgeKind.Transition, EdgeKind.Fly, EdgeKind.Fly,
         EdgeKind.Transition],
        [500.0, 500.0, 500.0, 500.0], 2000.0)
    log = run_mission(plan, _flat_env(), model, MissionParams())
    assert log.success
    assert log.final_error < 0.3
    # one arrival time per waypoint after the start
    assert len(log.waypoint_times) == len(pos) - 1


@pytest.mark.slow
def test_fault_injection_reports_failing_waypoint():
    """An unreachable flight waypoint times out and the log names it."""
    model = CostModel(c_walk_per_m=21.0)
    pos = np.array([[1.0, 5.0, 0.0], [1.0, 5.0, 2.0], [1.0, 5.0, 200.0],
                    [6.0, 5.0, 0.0]])
    plan = MissionPlan(
        [0, 1, 2, 3], pos,
        [ModeTag.Walking, ModeTag.Flying, ModeTag.Flying, ModeTag.Walking],
        [EdgeKind.Transition, EdgeKind.Fly, EdgeKind.Transition],
        [500.0, 500.0, 500.0], 1500.0)
    from mmloco.geometry import Box3, EnvironmentMap
    env = EnvironmentMap(Box3(np.zeros(3), np.array([12.0, 10.0, 300.0])),
                         0.0, [])
    mp = MissionParams(waypoint_timeout=20.0)
    log = run_mission(plan, env, model, mp)
    assert not log.success
    assert log.fail_index == 2
    assert "timeout" in log.fail_reason
