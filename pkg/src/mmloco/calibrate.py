"""Calibration of the planner's energy constants from closed-loop rollouts.

Two constants are fitted:

* ``c_walk_per_m`` — net energy per meter of a steady governed trot,
  measured on a straight flat-ground walk.
* ``C_t`` — energy of one mode change.  A mode change is more than the
  joint work of the morph sequence: takeoff and landing spend hover power
  on climb-out, approach, alignment and touchdown beyond the idealized
  point-to-point flight energy that the Fly/Transition edge terms already
  model.  C_t is therefore fitted as the per-transformation *overhead* of a
  canonical walk/fly/walk mission over its idealized flight ledger, which
  keeps planned and realized mission energies directly comparable.  The
  pure morph-sequence joint energy is reported in the provenance for
  reference.

All rollouts are deterministic; the provenance block records the scenario
geometry and simulated durations (never wall-clock times), so calibration
output files are byte-stable across runs.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from mmloco.geometry import Box3, EnvironmentMap
from mmloco.planner import CostModel, EdgeKind, ModeTag
from mmloco.planner.costs import fly_edge_cost, transition_edge_cost
from mmloco.planner.search import MissionPlan
from mmloco.rom.dynamics import BodyState, LegKinematics, RobotState, Simulator
from mmloco.rom.params import GroundModel, RobotParams
from mmloco.sim import MissionParams, TransformDirection, run_mission
from mmloco.sim.mission import MissionLog
from mmloco.sim.transform import STANCE_LENGTH, T_TRANSFORM, transform_sequence

def _flat_env(x_extent: float = 12.0) -> EnvironmentMap:
    box = Box3(np.zeros(3), np.array([max(12.0, x_extent), 10.0, 6.0]))
    return EnvironmentMap(box, 0.0, [])


def _walk_plan(distance: float) -> MissionPlan:
    pos = np.array([[1.0, 5.0, 0.0], [1.0 + distance, 5.0, 0.0]])
    return MissionPlan(
        node_ids=[0, 1], positions=pos,
        modes=[ModeTag.Walking, ModeTag.Walking],
        edge_kinds=[EdgeKind.Walk], edge_costs=[0.0], total_cost=0.0)


def walk_rollout(distance: float = 5.0,
                 params: MissionParams | None = None,
                 model: CostModel | None = None,
                 robot: RobotParams | None = None) -> MissionLog:
    """Straight governed walk on flat ground; returns the mission log."""
    if params is None:
        # default timeout budgets for the trot's ~0.16 m/s steady speed
        params = MissionParams(waypoint_timeout=max(60.0, 20.0 + distance / 0.1))
    return run_mission(_walk_plan(distance), _flat_env(distance + 4.0),
                       model or CostModel(), params, robot=robot)


def calibrate_walk(distance: float = 5.0,
                   params: MissionParams | None = None,
                   robot: RobotParams | None = None) -> tuple[float, dict]:
    """Fit c_walk_per_m = realized energy / realized displacement."""
    log = walk_rollout(distance, params, robot=robot)
    if not log.success:
        raise RuntimeError(f"walk calibration rollout failed: {log.fail_reason}")
    first = np.asarray(log.rows[0][1:3], dtype=float)
    last = np.asarray(log.rows[-1][1:3], dtype=float)
    disp = float(np.linalg.norm(last - first))
    energy = log.total_realized
    details = {
        "commanded_distance_m": distance,
        "displacement_m": round(disp, 6),
        "energy_J": round(energy, 6),
        "duration_s": round(log.duration, 6),
        "min_h_w": round(float(log.min_h_w), 9),
    }
    return energy / disp, details


def morph_joint_energy(robot: RobotParams | None = None,
                       ground: GroundModel | None = None,
                       t_t: float = T_TRANSFORM,
                       dt: float = 1e-3) -> dict:
    """Joint energy of the two morph sequences on a standing/parked robot."""
    robot = robot or RobotParams()
    ground = ground or GroundModel()
    out = {}
    for direction in (TransformDirection.ToAir, TransformDirection.ToGround):
        sim = Simulator(robot, ground)
        if direction == TransformDirection.ToAir:
            qk0 = np.column_stack([np.zeros(4), np.zeros(4),
                                   np.full(4, STANCE_LENGTH)])
            z0 = 0.24 - robot.m * robot.g / (4.0 * ground.k_gp)
        else:
            qk0 = np.column_stack([np.full(4, np.pi / 2), np.zeros(4),
                                   np.full(4, robot.l_nominal)])
            z0 = robot.gear_height - robot.m * robot.g / (4.0 * ground.k_gp)
        state = RobotState(BodyState(p_b=np.array([0.0, 0.0, z0])),
                           LegKinematics(qk0))
        qk_fn, _ = transform_sequence(qk0, direction, robot, t_t)
        energy = 0.0
        n = int(round(t_t / dt))
        for k in range(n):
            state = sim.step(state, dt, None, qk_fn((k + 1) * dt))
            energy += sim.last_power * dt
        out[direction.value] = round(energy, 6)
    out["t_t"] = t_t
    return out


def _mode_change_plan(model: CostModel) -> MissionPlan:
    """Canonical flat-ground mission: morph up, 2 m climb, 3 m cruise,
    land.  Edge costs are the idealized flight terms with C_t = 0."""
    pos = np.array([[1.0, 5.0, 0.0], [1.0, 5.0, 2.0],
                    [6.0, 5.0, 2.0], [6.0, 5.0, 0.0]])
    zero_ct = dataclasses.replace(model, C_t=1e-9)
    kinds = [EdgeKind.Transition, EdgeKind.Fly, EdgeKind.Transition]
    costs = [
        transition_edge_cost(0.0, pos[0][2], pos[1][2], zero_ct),
        fly_edge_cost(float(np.linalg.norm(pos[2] - pos[1])),
                      pos[1][2], pos[2][2], zero_ct),
        transition_edge_cost(0.0, pos[2][2], pos[3][2], zero_ct),
    ]
    return MissionPlan(
        node_ids=[0, 1, 2, 3], positions=pos,
        modes=[ModeTag.Walking, ModeTag.Flying, ModeTag.Flying,
               ModeTag.Walking],
        edge_kinds=kinds, edge_costs=costs, total_cost=float(sum(costs)))


def calibrate_transform(model: CostModel,
                        params: MissionParams | None = None,
                        robot: RobotParams | None = None
                        ) -> tuple[float, dict]:
    """Fit C_t = (realized mission energy - idealized ledger) / 2."""
    plan = _mode_change_plan(model)
    log = run_mission(plan, _flat_env(), model, params or MissionParams(),
                      robot=robot)
    if not log.success:
        raise RuntimeError(
            f"transform calibration rollout failed: {log.fail_reason}")
    ideal = log.total_planned
    overhead = log.total_realized - ideal
    c_t = overhead / 2.0
    details = {
        "realized_J": round(log.total_realized, 6),
        "ideal_flight_J": round(ideal, 6),
        "overhead_per_transform_J": round(c_t, 6),
        "duration_s": round(log.duration, 6),
        "n_transforms": log.n_transforms,
    }
    return c_t, details


def calibrate(model_base: CostModel | None = None,
              params: MissionParams | None = None,
              seed: int = 0,
              walk_distance: float = 5.0,
              robot: RobotParams | None = None) -> tuple[CostModel, dict]:
    """Run both oracles and return (calibrated model, provenance dict)."""
    robot = robot or RobotParams()
    base = dataclasses.replace(model_base or CostModel(), m=robot.m)
    mp = params or MissionParams(seed=seed)
    c_walk, walk_details = calibrate_walk(walk_distance, mp, robot)
    morph = morph_joint_energy(robot)
    c_t, transform_details = calibrate_transform(
        dataclasses.replace(base, c_walk_per_m=c_walk), mp, robot)
    model = dataclasses.replace(base, c_walk_per_m=c_walk, C_t=c_t)
    provenance = {
        "seed": seed,
        "dt": mp.dt,
        "m": robot.m,
        "walk_rollout": walk_details,
        "morph_joint_energy_J": morph,
        "mode_change_rollout": transform_details,
    }
    return model, provenance


def write_cost_model(path, model: CostModel, provenance: dict | None = None
                     ) -> None:
    doc = {
        "cost_model": {k: round(v, 6)
                       for k, v in dataclasses.asdict(model).items()},
        "provenance": provenance or {},
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_cost_model(path) -> CostModel:
    with open(path) as f:
        doc = json.load(f)
    return CostModel(**doc["cost_model"])
