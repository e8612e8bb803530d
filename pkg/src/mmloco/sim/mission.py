"""Mission execution: the walk / transform / fly state machine over a
planned route, with the reference governor in the loop during stance and a
realized-energy ledger.

Mode cycle: Walking -> TransformToAir -> Flying -> TransformToGround ->
Walking.  Realized power is the ROM's rectified joint power, plus the
hover-power model P_f + m g max(zdot, 0) while airborne so realized and
planned flight energies are directly comparable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from mmloco.geometry import EnvironmentMap, support_height
from mmloco.governor import GovernorState, friction_constraints, govern
from mmloco.planner import CostModel, EdgeKind, ModeTag
from mmloco.planner.search import MissionPlan
from mmloco.rom import kinematics as kin
from mmloco.rom.dynamics import (
    BodyState,
    IntegrationDivergedError,
    LegKinematics,
    RobotState,
    SingularConfigurationError,
    Simulator,
)
from mmloco.rom.params import GroundModel, RobotParams, ServoLimits
from mmloco.sim.gait import GaitParams, TrotGait
from mmloco.sim.trackers import FlightGains, FlightTracker, walk_command
from mmloco.sim.transform import (
    STANCE_LENGTH,
    T_TRANSFORM,
    TransformDirection,
    transform_sequence,
)


class LocoMode(enum.Enum):
    Walking = "Walking"
    TransformToAir = "TransformToAir"
    Flying = "Flying"
    TransformToGround = "TransformToGround"


class MissionFailure(RuntimeError):
    def __init__(self, reason: str, waypoint_index: int):
        super().__init__(f"waypoint {waypoint_index}: {reason}")
        self.reason = reason
        self.waypoint_index = waypoint_index


@dataclass
class MissionParams:
    dt: float = 1e-3
    control_dt: float = 1e-2
    log_dt: float = 1e-2
    t_transform: float = T_TRANSFORM
    arrival_walk: float = 0.15
    arrival_fly: float = 0.3
    waypoint_timeout: float = 60.0
    hover_above_landing: float = 0.4   # m, staging height before touchdown
    use_governor: bool = True
    gov_max_step: float = 2e-3         # m per governor substep
    seed: int = 0
    transform_tilt_abort: float = np.deg2rad(15.0)
    fall_tilt: float = np.deg2rad(60.0)


@dataclass
class MissionLog:
    rows: list = field(default_factory=list)       # CSV rows (34 columns)
    segments: list = field(default_factory=list)   # {kind, planned_J, realized_J}
    waypoint_times: list = field(default_factory=list)
    mode_timeline: list = field(default_factory=list)  # (t, mode name)
    n_transforms: int = 0
    min_h_w: float = np.inf
    success: bool = False
    fail_index: int | None = None
    fail_reason: str | None = None
    final_error: float = np.nan
    duration: float = 0.0
    seed: int = 0

    @property
    def total_realized(self) -> float:
        return float(sum(s["realized_J"] for s in self.segments))

    @property
    def total_planned(self) -> float:
        return float(sum(s["planned_J"] for s in self.segments))


CSV_HEADER = ("t,p_b_x,p_b_y,p_b_z,theta_b_r,theta_b_p,theta_b_y,"
              "v_b_x,v_b_y,v_b_z,omega_b_r,omega_b_p,omega_b_y,"
              + ",".join(f"q_k_{leg}_{j}" for leg in kin.LEG_NAMES
                         for j in ("phi", "psi", "l"))
              + ",P_j,mode")


def write_trajectory_csv(log: MissionLog, path) -> None:
    with open(path, "w") as f:
        f.write(CSV_HEADER + "\n")
        for row in log.rows:
            vals, mode = row[:-1], row[-1]
            f.write(",".join(f"{v:.9g}" for v in vals) + f",{mode}\n")


def write_ledger_json(log: MissionLog, path) -> None:
    import json
    doc = {
        "segments": [
            {"kind": s["kind"], "planned_J": round(s["planned_J"], 6),
             "realized_J": round(s["realized_J"], 6)}
            for s in log.segments
        ],
        "result": {
            "success": log.success,
            "fail_index": log.fail_index,
            "fail_reason": log.fail_reason,
            "n_transforms": log.n_transforms,
            "final_error_m": round(log.final_error, 6),
            "duration_s": round(log.duration, 6),
            "total_planned_J": round(log.total_planned, 6),
            "total_realized_J": round(log.total_realized, 6),
            "min_h_w": round(float(log.min_h_w), 9)
            if np.isfinite(log.min_h_w) else None,
            "seed": log.seed,
        },
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


class _Runner:
    def __init__(self, plan: MissionPlan, env: EnvironmentMap,
                 model: CostModel, mp: MissionParams,
                 robot: RobotParams, ground: GroundModel,
                 servo: ServoLimits, gait: GaitParams,
                 flight: FlightGains):
        self.plan = plan
        self.env = env
        self.model = model
        self.mp = mp
        self.robot = robot
        self.sim = Simulator(robot, ground, servo,
                             surface_fn=lambda x, y, z:
                             support_height(env, x, y, z))
        self.gait = TrotGait(gait, robot)
        self.flight = FlightTracker(robot, flight)
        self.flight.g.v_cruise = model.v_f
        self.log = MissionLog(seed=mp.seed)
        self.t = 0.0
        self.energy = 0.0
        self._last_row_t = -np.inf
        self._window_energy = 0.0
        self.mode = LocoMode.Walking
        self.wp_index = 0

        start = plan.positions[0]
        z0 = float(start[2]) + self.gait.p.body_height \
            - robot.m * robot.g / (4.0 * ground.k_gp)
        qk0 = np.column_stack([np.zeros(4), np.zeros(4),
                               np.full(4, STANCE_LENGTH)])
        self.state = RobotState(
            BodyState(p_b=np.array([start[0], start[1], z0])),
            LegKinematics(qk0))
        self.gait_t = 0.0
        self._x_w = self._current_foot_refs()
        self.gov = GovernorState(self._x_w.copy(), self._x_w.copy()) \
            if mp.use_governor else None
        self._set_mode(LocoMode.Walking)

    # -- bookkeeping --------------------------------------------------------

    def _set_mode(self, mode: LocoMode) -> None:
        self.mode = mode
        self.log.mode_timeline.append((round(self.t, 9), mode.value))

    def _current_foot_refs(self) -> np.ndarray:
        return kin.foot_positions_body(self.state.legs.qk,
                                       self.robot.hip_offsets).ravel()

    def _foot_surfaces(self) -> np.ndarray:
        b = self.state.body
        R = kin.rotation_matrix(b.theta_b)
        feet = b.p_b + kin.foot_positions_body(
            self.state.legs.qk, self.robot.hip_offsets) @ R.T
        return np.array([support_height(self.env, f[0], f[1], f[2])
                         for f in feet])

    def _emit_row(self) -> None:
        dt_row = self.t - self._last_row_t
        p_j = self._window_energy / dt_row if dt_row > 0 else 0.0
        b, legs = self.state.body, self.state.legs
        row = ([self.t] + list(b.p_b) + list(b.theta_b) + list(b.v_b)
               + list(b.omega_b) + list(legs.qk.ravel()) + [p_j]
               + [self.mode.value])
        self.log.rows.append(row)
        self._last_row_t = self.t
        self._window_energy = 0.0

    def _step(self, thrusts=None, qk_target=None) -> None:
        mp = self.mp
        try:
            self.state = self.sim.step(self.state, mp.dt, thrusts, qk_target)
        except (IntegrationDivergedError, SingularConfigurationError) as exc:
            raise MissionFailure(f"dynamics diverged: {exc}", self.wp_index)
        p = self.sim.last_power
        if self.mode == LocoMode.Flying:
            # hover power plus the signed potential-energy rate: climbing
            # costs extra, descending recovers, matching the planner's
            # directional flight-cost model
            p += self.model.P_f + self.robot.m * self.robot.g \
                * float(self.state.body.v_b[2])
            p = max(p, 0.0)
        self.energy += p * mp.dt
        self._window_energy += p * mp.dt
        self.t += mp.dt
        b = self.state.body
        if self.mode in (LocoMode.Walking, LocoMode.TransformToAir,
                         LocoMode.TransformToGround):
            if max(abs(b.theta_b[0]), abs(b.theta_b[1])) > mp.fall_tilt:
                raise MissionFailure("fall-over", self.wp_index)
        if self.t - self._last_row_t >= mp.log_dt - 1e-12:
            self._emit_row()

    # -- behaviors ----------------------------------------------------------

    def walk_to(self, target: np.ndarray, radius: float) -> None:
        """Trot toward ``target``, governing foot references every sim step.

        The heading policy runs at the (coarser) command rate; the gait
        reference, governor update, and leg IK run at the full 1 kHz step
        rate.  On the common path where both x_w and x_r are feasible, the
        governor update law reduces to pure attraction at rate
        alpha_r + alpha_t (empty violated set => the nullspace is the whole
        space), which is applied directly without finite-difference
        gradients; the full substepped update runs only near the boundary.
        """
        mp = self.mp
        per_cmd = max(1, int(round(mp.control_dt / mp.dt)))
        deadline = self.t + mp.waypoint_timeout
        ramp_t0 = self.t
        qk_tgt = self.state.legs.qk.copy()
        v_frac = yaw_rate = 0.0
        k = 0
        while True:
            b = self.state.body
            if np.linalg.norm(b.p_b[:2] - target[:2]) <= radius:
                return
            if self.t > deadline:
                raise MissionFailure("walking waypoint timeout",
                                     self.wp_index)
            if k % per_cmd == 0:
                v_frac, yaw_rate = walk_command(self.state, target)
                v_frac *= min((self.t - ramp_t0) / 1.0, 1.0)
            if self.gov is not None:
                # lead-compensate the first-order tracking lag of the
                # governor's feasible-path dynamics (rate alpha_r + alpha_t)
                lead = mp.dt + 1.0 / (self.gov.alpha_r + self.gov.alpha_t)
            else:
                lead = mp.dt
            x_r = self.gait.foot_references(
                self.gait_t + lead, v_frac, yaw_rate, self.state).ravel()
            if self.gov is not None:
                surf = self._foot_surfaces()
                c = friction_constraints(
                    self.state, self._x_w, self.sim.ground, self.robot,
                    self.sim.servo, surf, x_r, gradients=False)
                if c.h_w.size:
                    self.log.min_h_w = min(self.log.min_h_w,
                                           float(c.h_w.min()))
                feasible = (not c.h_w.size) or (c.h_w.min() >= 0
                                                and c.h_r.min() >= 0)
                if feasible:
                    e = x_r - self._x_w
                    step = (self.gov.alpha_r + self.gov.alpha_t) * mp.dt * e
                    mmax = float(np.max(np.abs(step))) if step.size else 0.0
                    if mmax > mp.gov_max_step:
                        step *= mp.gov_max_step / mmax
                    x_w_new = self._x_w + step
                    self.gov.x_w = x_w_new.copy()
                    self.gov.x_r = x_r.copy()
                else:
                    self.gov.x_r = x_r.copy()
                    self.gov.x_w = self._x_w.copy()
                    eval_fn = lambda x: friction_constraints(
                        self.state, x, self.sim.ground, self.robot,
                        self.sim.servo, surf, x_r)
                    self.gov = govern(self.gov, eval_fn, mp.dt,
                                      max_step=mp.gov_max_step)
                    x_w_new = self.gov.x_w
            else:
                x_w_new = x_r
            refs = x_w_new.reshape(4, 3)
            for i in range(4):
                qk_tgt[i] = kin.leg_ik(
                    refs[i] - self.robot.hip_offsets[i], kin.MIRROR[i])
            self._step(qk_target=qk_tgt)
            self._x_w = x_w_new
            self.gait_t += mp.dt
            k += 1

    def fly_to(self, target: np.ndarray, radius: float,
               cruise: bool = True) -> None:
        mp = self.mp
        deadline = self.t + mp.waypoint_timeout
        yaw_des = float(self.state.body.theta_b[2])
        qk_uav = self.flight.qk_uav
        while True:
            if np.linalg.norm(self.state.body.p_b - target) <= radius:
                return
            if self.t > deadline:
                raise MissionFailure("flight waypoint timeout", self.wp_index)
            T = self.flight.thrusts(self.state, target, yaw_des, cruise)
            self._step(thrusts=T, qk_target=qk_uav)

    def land(self, spot: np.ndarray) -> None:
        """Descend over ``spot`` until the landing gear carries the body.

        Aligns laterally over the spot first so touchdown error stays small,
        then descends to a point just below gear height.
        """
        mp = self.mp
        surf = support_height(self.env, spot[0], spot[1], spot[2])
        gear = -float(self.robot.gear_offsets[0, 2])
        hold = np.array([spot[0], spot[1], surf + gear
                         + mp.hover_above_landing])
        # aim below the gear height so the descent keeps a firm rate;
        # the gear's compliant contact absorbs the final approach
        touchdown = np.array([spot[0], spot[1], surf + gear - 0.15])
        deadline = self.t + mp.waypoint_timeout
        yaw_des = float(self.state.body.theta_b[2])
        aligned = False
        while True:
            b = self.state.body
            if not aligned:
                aligned = (np.linalg.norm(b.p_b[:2] - spot[:2]) < 0.1
                           and np.linalg.norm(b.v_b[:2]) < 0.2)
            if aligned and (b.p_b[2] - surf) <= gear + 0.01 \
                    and abs(b.v_b[2]) < 0.15:
                break
            if self.t > deadline:
                raise MissionFailure("landing timeout", self.wp_index)
            T = self.flight.thrusts(self.state,
                                    touchdown if aligned else hold,
                                    yaw_des, cruise=False)
            self._step(thrusts=T, qk_target=self.flight.qk_uav)
        # settle on the gear with rotors off
        for _ in range(int(round(0.3 / mp.dt))):
            self._step(thrusts=np.zeros(4), qk_target=self.flight.qk_uav)

    def transform(self, direction: TransformDirection) -> None:
        mp = self.mp
        self._set_mode(LocoMode.TransformToAir
                       if direction == TransformDirection.ToAir
                       else LocoMode.TransformToGround)
        qk_fn, _ = transform_sequence(self.state.legs.qk, direction,
                                      self.robot, mp.t_transform)
        n = int(round(mp.t_transform / mp.dt))
        for k in range(n):
            b = self.state.body
            if max(abs(b.theta_b[0]), abs(b.theta_b[1])) \
                    > mp.transform_tilt_abort:
                raise MissionFailure("tilt abort during transformation",
                                     self.wp_index)
            self._step(qk_target=qk_fn((k + 1) * mp.dt))
        self.log.n_transforms += 1
        if direction == TransformDirection.ToAir:
            self._set_mode(LocoMode.Flying)
        else:
            self._set_mode(LocoMode.Walking)
            self.gait_t = 0.0
            self._x_w = self._current_foot_refs()

    # -- the state machine over the plan -------------------------------------

    def run(self) -> MissionLog:
        plan, mp = self.plan, self.mp
        self._emit_row()
        seg_e0 = 0.0
        for j, kind in enumerate(plan.edge_kinds):
            self.wp_index = j + 1
            seg_e0 = self.energy
            tgt = plan.positions[j + 1]
            tgt_mode = plan.modes[j + 1]
            if kind == EdgeKind.Walk:
                self.walk_to(tgt, mp.arrival_walk)
            else:
                # any airborne edge: make sure we are flying first
                if self.mode == LocoMode.Walking:
                    self.transform(TransformDirection.ToAir)
                if tgt_mode == ModeTag.Flying:
                    self.fly_to(tgt, mp.arrival_fly)
                else:
                    hover = np.array([tgt[0], tgt[1],
                                      tgt[2] + mp.hover_above_landing])
                    self.fly_to(hover, mp.arrival_fly)
                    self.land(tgt)
                    self.transform(TransformDirection.ToGround)
                    # walk off any residual touchdown offset
                    b = self.state.body
                    if np.linalg.norm(b.p_b[:2] - tgt[:2]) > mp.arrival_walk:
                        self.walk_to(tgt, mp.arrival_walk)
            self.log.waypoint_times.append(round(self.t, 9))
            self.log.segments.append({
                "kind": EdgeKind(kind).name,
                "planned_J": float(plan.edge_costs[j]),
                "realized_J": float(self.energy - seg_e0),
            })
        if self.t - self._last_row_t > 1e-9:
            self._emit_row()
        self.log.success = True
        self.log.final_error = float(np.linalg.norm(
            self.state.body.p_b[:2] - plan.positions[-1][:2]))
        self.log.duration = self.t
        return self.log


def run_mission(plan: MissionPlan, env: EnvironmentMap,
                model: CostModel | None = None,
                params: MissionParams | None = None,
                robot: RobotParams | None = None,
                ground: GroundModel | None = None,
                servo: ServoLimits | None = None,
                gait: GaitParams | None = None,
                flight: FlightGains | None = None) -> MissionLog:
    """Execute ``plan`` on the ROM and return the full mission log.

    Failures (fall-over, divergence, waypoint timeout, transform abort) are
    reported in the log rather than raised.
    """
    if len(plan.node_ids) == 0:
        raise ValueError("empty plan")
    if plan.modes[0] != ModeTag.Walking:
        raise ValueError("missions must start at a walking node")
    runner = _Runner(plan, env, model or CostModel(),
                     params or MissionParams(), robot or RobotParams(),
                     ground or GroundModel(), servo or ServoLimits(),
                     gait or GaitParams(), flight or FlightGains())
    try:
        return runner.run()
    except MissionFailure as exc:
        log = runner.log
        log.success = False
        log.fail_index = exc.waypoint_index
        log.fail_reason = exc.reason
        log.final_error = float(np.linalg.norm(
            runner.state.body.p_b[:2] - plan.positions[-1][:2]))
        log.duration = runner.t
        return log
