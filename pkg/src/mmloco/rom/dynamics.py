"""Euler-Lagrange dynamics of the reduced-order body with contact and thrust.

State layout: the dynamical coordinates are q_d = [p_b; theta_b] with
generalized velocities [v_b; omega_b], where omega_b holds *Euler-angle
rates* (see mmloco.rom.kinematics for the pinned convention).  Legs are
massless: q_k is a kinematic input advanced by rate-limited servo tracking,
and contact/thruster forces map onto the body through point Jacobians.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mmloco.rom.params import GroundModel, RobotParams, ServoLimits
from mmloco.rom import kinematics as kin
from mmloco.rom import _fast

_PITCH_LIMIT = np.pi / 2 - 0.05
# rotor spin directions, diagonal pairs matched (FL, FR, RL, RR)
ROTOR_SIGN = np.array([1.0, -1.0, -1.0, 1.0])


class SingularConfigurationError(RuntimeError):
    """Body pitch reached the Euler-angle singularity."""


class IntegrationDivergedError(RuntimeError):
    """Integrator produced a non-finite state."""


@dataclass
class BodyState:
    p_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega_b: np.ndarray = field(default_factory=lambda: np.zeros(3))  # Euler rates

    def copy(self) -> "BodyState":
        return BodyState(self.p_b.copy(), self.theta_b.copy(),
                         self.v_b.copy(), self.omega_b.copy())


@dataclass
class LegKinematics:
    """Joint values qk[i] = (phi_i, psi_i, l_i) and their rates, 4 legs."""

    qk: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    qk_dot: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))

    def copy(self) -> "LegKinematics":
        return LegKinematics(self.qk.copy(), self.qk_dot.copy())


@dataclass
class RobotState:
    body: BodyState = field(default_factory=BodyState)
    legs: LegKinematics = field(default_factory=LegKinematics)

    def copy(self) -> "RobotState":
        return RobotState(self.body.copy(), self.legs.copy())


@dataclass
class ForceSet:
    """Per-leg ground reaction and thruster forces, inertial frame, N."""

    f_g: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    f_t: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))


# ---------------------------------------------------------------------------
# model terms
# ---------------------------------------------------------------------------

def mass_matrix(body: BodyState, params: RobotParams) -> np.ndarray:
    """6x6 generalized inertia: blockdiag(m I3, H^T I_body H)."""
    H = kin.euler_rate_matrix(body.theta_b)
    if abs(np.linalg.det(H)) < 1e-6:
        raise SingularConfigurationError(
            f"Euler rate map singular at theta={body.theta_b}")
    M = np.zeros((6, 6))
    M[:3, :3] = params.m * np.eye(3)
    M[3:, 3:] = H.T @ params.inertia @ H
    return M


def _rot_bias(theta: np.ndarray, theta_dot: np.ndarray,
              inertia: np.ndarray) -> np.ndarray:
    """Coriolis/centrifugal terms of the rotational block (Christoffel form)."""
    H = kin.euler_rate_matrix(theta)
    dH = kin.euler_rate_matrix_derivs(theta)
    IH = inertia @ H
    # dM[k] = d(M_rot)/d(theta_k)
    dM = np.einsum("kji,jl->kil", dH, IH) + np.einsum("ji,kjl->kil", H, inertia @ dH)
    Mdot = np.tensordot(theta_dot, dM, axes=(0, 0))
    quad = np.einsum("kij,i,j->k", dM, theta_dot, theta_dot)
    return Mdot @ theta_dot - 0.5 * quad


def bias_forces(body: BodyState, params: RobotParams) -> np.ndarray:
    """h(q_d, q_d_dot): gravity plus Coriolis terms (6-vector)."""
    H = kin.euler_rate_matrix(body.theta_b)
    if abs(np.linalg.det(H)) < 1e-6:
        raise SingularConfigurationError(
            f"Euler rate map singular at theta={body.theta_b}")
    h = np.zeros(6)
    h[2] = params.m * params.g
    h[3:] = _rot_bias(body.theta_b, body.omega_b, params.inertia)
    return h


def ground_reaction(foot_pos: np.ndarray, foot_vel: np.ndarray,
                    model: GroundModel, surface_z: float = 0.0) -> np.ndarray:
    """Inertial contact force on one foot (compliant normal, Stribeck shear).

    Zero above the surface; the normal component is clamped at zero so the
    ground never pulls.  The shear direction term tanh(v / v_t) regularizes
    sgn(v), so a foot at rest sees no shear and near-rest contact behaves
    viscously instead of chattering.
    """
    out = np.zeros(3)
    dz = foot_pos[2] - surface_z
    if dz >= 0.0:
        return out
    fz = -model.k_gp * dz - model.k_gd * foot_vel[2]
    if fz <= 0.0:
        return out
    out[2] = fz
    for ax in (0, 1):
        v = foot_vel[ax]
        stribeck = model.mu_c + (model.mu_s - model.mu_c) * np.exp(-(v * v) / model.v_s**2)
        out[ax] = -stribeck * fz * np.tanh(v / model.v_t) - model.mu_v * v
    return out


def ground_reaction_batch(pos: np.ndarray, vel: np.ndarray, model: GroundModel,
                          surface_z: np.ndarray) -> np.ndarray:
    """Vectorized ``ground_reaction`` over (N, 3) foot states."""
    pos = np.atleast_2d(pos)
    vel = np.atleast_2d(vel)
    dz = pos[:, 2] - surface_z
    fz = np.where(dz < 0.0, -model.k_gp * dz - model.k_gd * vel[:, 2], 0.0)
    fz = np.maximum(fz, 0.0)
    vt = vel[:, :2]
    stribeck = model.mu_c + (model.mu_s - model.mu_c) * np.exp(
        -(vt * vt) / model.v_s**2)
    out = np.zeros_like(pos)
    out[:, 2] = fz
    out[:, :2] = -stribeck * fz[:, None] * np.tanh(vt / model.v_t) - model.mu_v * vt
    out[:, :2] *= (fz > 0.0)[:, None]
    return out


def _point_rot_jacobian(dR: np.ndarray, s_body: np.ndarray) -> np.ndarray:
    """Columns d(R s)/d(theta_k) for body-frame points s (N, 3) -> (N, 3, 3)."""
    return np.einsum("kab,nb->nak", dR, np.atleast_2d(s_body))


def generalized_forces(body: BodyState, legs: LegKinematics, forces: ForceSet,
                       params: RobotParams) -> np.ndarray:
    """Map per-leg foot and thruster forces into the q_d coordinates."""
    feet = kin.foot_positions_body(legs.qk, params.hip_offsets)
    thr, _ = kin.thruster_points_body(legs.qk, params.hip_offsets,
                                      params.thruster_offset)
    dR = kin.rotation_matrix_derivs(body.theta_b)
    u = np.zeros(6)
    u[:3] = forces.f_g.sum(axis=0) + forces.f_t.sum(axis=0)
    Jf = _point_rot_jacobian(dR, feet)
    Jt = _point_rot_jacobian(dR, thr)
    u[3:] = (np.einsum("nak,na->k", Jf, forces.f_g)
             + np.einsum("nak,na->k", Jt, forces.f_t))
    return u


def joint_power(state: RobotState, forces: ForceSet, params: RobotParams) -> float:
    """Total positive servo power: sum over joints of max(0, tau * qdot).

    Actuator torques balance the external foot/thruster forces through the
    massless leg chain; negative (braking) work is discarded.
    """
    R = kin.rotation_matrix(state.body.theta_b)
    total = 0.0
    for i in range(4):
        phi, psi, l = state.legs.qk[i]
        m = kin.MIRROR[i]
        tau = np.zeros(3)
        fg_b = R.T @ forces.f_g[i]
        tau -= kin.leg_jacobian(phi, psi, l, m).T @ fg_b
        ft_b = R.T @ forces.f_t[i]
        if np.any(ft_b):
            Jt = kin.leg_jacobian(phi, psi, params.thruster_offset, m)
            Jt[:, 2] = 0.0  # thruster offset is fixed along the leg
            tau -= Jt.T @ ft_b
        total += np.sum(np.maximum(0.0, tau * state.legs.qk_dot[i]))
    return float(total)


# ---------------------------------------------------------------------------
# simulator
# ---------------------------------------------------------------------------

class Simulator:
    """Fixed-step RK4 integrator for the body, with kinematic legs.

    ``surface_fn(x, y, z) -> float`` supplies the local supporting surface
    under a contact point (flat ground by default).  Landing-gear contact
    points under the chassis use the same compliant ground model as the feet.
    """

    def __init__(self, params: RobotParams | None = None,
                 ground: GroundModel | None = None,
                 servo: ServoLimits | None = None,
                 surface_fn=None, use_fast: bool | None = None):
        self.params = params or RobotParams()
        self.ground = ground or GroundModel()
        self.servo = servo or ServoLimits()
        self.surface_fn = surface_fn or (lambda x, y, z: 0.0)
        self.last_forces = ForceSet()
        self.last_power = 0.0
        self.use_fast = _fast.HAVE_NUMBA if use_fast is None else use_fast
        prm, gnd = self.params, self.ground
        self._robot_vec = np.array([prm.m, prm.g, prm.thruster_offset,
                                    prm.yaw_moment_coeff])
        self._ground_vec = np.array([gnd.k_gp, gnd.k_gd, gnd.mu_c, gnd.mu_s,
                                     gnd.mu_v, gnd.v_s, gnd.v_t])

    # -- helpers ----------------------------------------------------------

    def contact_points_body(self, qk: np.ndarray) -> np.ndarray:
        feet = kin.foot_positions_body(qk, self.params.hip_offsets)
        return np.vstack([feet, self.params.gear_offsets])

    def _surfaces(self, pts_world: np.ndarray) -> np.ndarray:
        return np.array([self.surface_fn(p[0], p[1], p[2]) for p in pts_world])

    def _deriv(self, y: np.ndarray, qk: np.ndarray, qk_dot: np.ndarray,
               thrusts: np.ndarray, surfaces: np.ndarray):
        p = y[0:3]
        theta = y[3:6]
        v = y[6:9]
        td = y[9:12]
        prm = self.params
        R = kin.rotation_matrix(theta)
        dR = kin.rotation_matrix_derivs(theta)
        H = kin.euler_rate_matrix(theta)
        omega_body = H @ td

        # contact points: 4 feet + 4 landing-gear pads
        pts_b = self.contact_points_body(qk)
        pts_w = p + pts_b @ R.T
        # body-frame point velocity: omega x s (+ leg joint motion for feet)
        vel_b = np.cross(omega_body, pts_b)
        for i in range(4):
            phi, psi, l = qk[i]
            vel_b[i] += kin.leg_jacobian(phi, psi, l, kin.MIRROR[i]) @ qk_dot[i]
        vel_w = v + vel_b @ R.T

        fg = ground_reaction_batch(pts_w, vel_w, self.ground, surfaces)

        # thrust
        thr_b, axes_b = kin.thruster_points_body(qk, prm.hip_offsets,
                                                 prm.thruster_offset)
        ft = (thrusts[:, None] * axes_b) @ R.T

        F = fg.sum(axis=0) + ft.sum(axis=0)
        Jc = _point_rot_jacobian(dR, pts_b)
        Jt = _point_rot_jacobian(dR, thr_b)
        tau = (np.einsum("nak,na->k", Jc, fg)
               + np.einsum("nak,na->k", Jt, ft))
        # rotor drag yaw moments, along each thrust axis in the body frame
        drag_b = (ROTOR_SIGN * prm.yaw_moment_coeff * thrusts)[:, None] * axes_b
        tau += H.T @ drag_b.sum(axis=0)

        a = F / prm.m
        a[2] -= prm.g
        Mrot = H.T @ prm.inertia @ H
        tdd = np.linalg.solve(Mrot, tau - _rot_bias(theta, td, prm.inertia))
        dy = np.empty(12)
        dy[0:3] = v
        dy[3:6] = td
        dy[6:9] = a
        dy[9:12] = tdd
        return dy, ForceSet(fg[:4].copy(), ft.copy())

    def _advance_legs(self, legs: LegKinematics, qk_target: np.ndarray,
                      dt: float) -> tuple[np.ndarray, np.ndarray]:
        prm, srv = self.params, self.servo
        tgt = np.array(qk_target, dtype=float)
        tgt[:, 2] = np.clip(tgt[:, 2], prm.l_min, prm.l_max)
        delta = tgt - legs.qk
        lim = np.array([srv.angle_rate, srv.angle_rate, srv.length_rate]) * dt
        delta = np.clip(delta, -lim, lim)
        return legs.qk + delta, delta / dt

    def step(self, state: RobotState, dt: float,
             thrusts: np.ndarray | None = None,
             qk_target: np.ndarray | None = None) -> RobotState:
        """Advance one RK4 step; legs move toward qk_target under rate limits."""
        if not 0.0 < dt <= 1e-2:
            raise ValueError("dt must be in (0, 1e-2]")
        if abs(state.body.theta_b[1]) > _PITCH_LIMIT:
            raise SingularConfigurationError(
                f"pitch {state.body.theta_b[1]:.3f} rad exceeds the abort limit")
        thrusts = np.zeros(4) if thrusts is None else np.asarray(thrusts, float)
        thrusts = np.clip(thrusts, 0.0, self.params.thrust_max)

        if qk_target is None:
            qk1, qk_dot = state.legs.qk.copy(), np.zeros((4, 3))
        else:
            qk1, qk_dot = self._advance_legs(state.legs, qk_target, dt)

        b = state.body
        y0 = np.concatenate([b.p_b, b.theta_b, b.v_b, b.omega_b])

        # supporting surface per contact point, frozen over the step
        R0 = kin.rotation_matrix(b.theta_b)
        pts_w0 = b.p_b + self.contact_points_body(state.legs.qk) @ R0.T
        surfaces = self._surfaces(pts_w0)

        if self.use_fast:
            y1, fg0, ft0 = _fast.rk4_step(
                y0, state.legs.qk, qk1, qk_dot, thrusts, surfaces, dt,
                self._robot_vec, self._ground_vec, self.params.inertia,
                self.params.hip_offsets, self.params.gear_offsets)
            forces0 = ForceSet(fg0[:4].copy(), ft0)
            power0 = float(_fast.joint_power_fast(
                b.theta_b, state.legs.qk, qk_dot, fg0[:4], ft0,
                self.params.thruster_offset))
        else:
            def f(t, y):
                frac = t / dt
                qk_t = state.legs.qk + frac * (qk1 - state.legs.qk)
                return self._deriv(y, qk_t, qk_dot, thrusts, surfaces)

            k1, forces0 = f(0.0, y0)
            k2, _ = f(0.5 * dt, y0 + 0.5 * dt * k1)
            k3, _ = f(0.5 * dt, y0 + 0.5 * dt * k2)
            k4, _ = f(dt, y0 + dt * k3)
            y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            power0 = joint_power(
                RobotState(b, LegKinematics(state.legs.qk, qk_dot)),
                forces0, self.params)

        if not np.all(np.isfinite(y1)):
            raise IntegrationDivergedError("non-finite state after step")

        new = RobotState(
            BodyState(y1[0:3], y1[3:6], y1[6:9], y1[9:12]),
            LegKinematics(qk1, qk_dot),
        )
        self.last_forces = forces0
        self.last_power = power0
        return new
