"""Waypoint trackers: unicycle walking commands and a minimal flight
controller.

Walking follows a turn-then-walk unicycle policy; the resulting gait foot
references are filtered by the reference governor elsewhere.  Flight uses a
cascaded position -> attitude -> thrust-mix loop with yaw authority from the
differential drag of the two rotor pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmloco.rom import kinematics as kin
from mmloco.rom.dynamics import ROTOR_SIGN, RobotState
from mmloco.rom.params import RobotParams

HEADING_TOL = 0.1  # rad; below this the robot walks instead of turning


def _wrap(a: float) -> float:
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def walk_command(state: RobotState, target: np.ndarray,
                 v_max_frac: float = 1.0,
                 k_turn: float = 1.5) -> tuple[float, float]:
    """Unicycle policy toward ``target``: returns (v_frac, yaw_rate).

    If the heading error exceeds ``HEADING_TOL`` the robot turns in place;
    otherwise it trots forward, slowing smoothly near the target.
    """
    d = target[:2] - state.body.p_b[:2]
    dist = float(np.linalg.norm(d))
    if dist < 1e-6:
        return 0.0, 0.0
    err = _wrap(float(np.arctan2(d[1], d[0])) - float(state.body.theta_b[2]))
    yaw_rate = k_turn * err
    if abs(err) > HEADING_TOL:
        return 0.0, yaw_rate
    v = min(v_max_frac, dist / 0.3)  # decelerate over the last 30 cm
    return v, yaw_rate


@dataclass
class FlightGains:
    kp_pos: float = 3.5
    kd_pos: float = 3.5
    kp_att: float = 60.0
    kd_att: float = 12.0
    kp_yaw: float = 4.0
    kd_yaw: float = 2.0
    max_tilt: float = 0.35       # rad
    max_accel: float = 3.0       # m/s^2 commanded beyond gravity
    v_cruise: float = 2.0        # m/s along-track speed cap


class FlightTracker:
    """Cascaded position/attitude controller emitting four thrusts.

    The UAV configuration points every thrust axis along body +z; roll and
    pitch moments come from the thruster lever arms and yaw from the rotor
    drag imbalance, so the mixer is a fixed 4x4 solve.
    """

    def __init__(self, params: RobotParams | None = None,
                 gains: FlightGains | None = None,
                 qk_uav: np.ndarray | None = None):
        self.params = params or RobotParams()
        self.g = gains or FlightGains()
        if qk_uav is None:
            qk_uav = np.column_stack([
                np.full(4, np.pi / 2), np.zeros(4),
                np.full(4, self.params.l_nominal)])
        self.qk_uav = qk_uav
        pos, axes = kin.thruster_points_body(
            qk_uav, self.params.hip_offsets, self.params.thruster_offset)
        # mixer rows: total thrust, roll moment, pitch moment, yaw moment
        A = np.zeros((4, 4))
        A[0] = 1.0
        A[1] = pos[:, 1]
        A[2] = -pos[:, 0]
        A[3] = ROTOR_SIGN * self.params.yaw_moment_coeff
        self._mix = np.linalg.inv(A)
        self.saturated = False

    def thrusts(self, state: RobotState, target: np.ndarray,
                yaw_des: float = 0.0, cruise: bool = False) -> np.ndarray:
        """Four non-negative thrusts driving the body toward ``target``.

        With ``cruise`` the velocity reference holds the full ``v_cruise``
        magnitude toward the target instead of slowing proportionally, for
        constant-speed waypoint-to-waypoint legs.
        """
        g = self.g
        prm = self.params
        b = state.body
        err = target - b.p_b
        dist = float(np.linalg.norm(err))
        if dist > 1e-6:
            base = g.v_cruise if cruise \
                else min(g.kp_pos / g.kd_pos * dist, g.v_cruise)
            # braking-distance cap: approach no faster than a half-authority
            # deceleration can absorb, so waypoints are not overshot
            v_mag = min(base, np.sqrt(g.max_accel * dist))
            v_des = v_mag * err / dist
        else:
            v_des = np.zeros(3)
        a_cmd = g.kd_pos * (v_des - b.v_b)
        an = float(np.linalg.norm(a_cmd))
        if an > g.max_accel:
            a_cmd *= g.max_accel / an
        a_cmd[2] += prm.g

        f_total = prm.m * float(np.linalg.norm(a_cmd))
        # desired tilt: body z toward a_cmd, expressed as roll/pitch
        z_des = a_cmd / max(float(np.linalg.norm(a_cmd)), 1e-9)
        cy, sy = np.cos(b.theta_b[2]), np.sin(b.theta_b[2])
        zx = cy * z_des[0] + sy * z_des[1]   # into the yaw-aligned frame
        zy = -sy * z_des[0] + cy * z_des[1]
        pitch_des = float(np.clip(np.arctan2(zx, z_des[2]),
                                  -g.max_tilt, g.max_tilt))
        roll_des = float(np.clip(np.arctan2(-zy, z_des[2]),
                                 -g.max_tilt, g.max_tilt))

        tau = np.array([
            g.kp_att * (roll_des - b.theta_b[0]) - g.kd_att * b.omega_b[0],
            g.kp_att * (pitch_des - b.theta_b[1]) - g.kd_att * b.omega_b[1],
            g.kp_yaw * _wrap(yaw_des - b.theta_b[2]) - g.kd_yaw * b.omega_b[2],
        ]) * prm.inertia.diagonal()

        T = self._mix @ np.concatenate([[f_total], tau])
        clipped = np.clip(T, 0.0, prm.thrust_max)
        self.saturated = bool(np.any(clipped != T))
        return clipped
