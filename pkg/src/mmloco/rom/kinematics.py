"""Body orientation and leg forward/inverse kinematics.

Euler convention (pinned): theta_b = (roll, pitch, yaw), Z-Y-X composition
R = Rz(yaw) @ Ry(pitch) @ Rx(roll) mapping body to inertial coordinates.
Generalized velocities use Euler-angle rates; the body angular velocity is
omega_body = H(theta) @ theta_dot with H(0) = I.

Leg chain per leg (hip frontal angle phi, hip sagittal angle psi, length l):
the leg vector from the hip is Rx(mirror * phi) @ Ry(-psi) @ (0, 0, -l), so
phi = psi = 0 points the leg straight down and positive psi swings the foot
toward body +x.  ``mirror`` is +1 for left legs and -1 for right legs so a
common positive phi swings both sides outward/upward symmetrically.
"""

from __future__ import annotations

import numpy as np

LEG_NAMES = ("FL", "FR", "RL", "RR")
MIRROR = np.array([1.0, -1.0, 1.0, -1.0])


# ---------------------------------------------------------------------------
# orientation
# ---------------------------------------------------------------------------

def rotation_matrix(theta: np.ndarray) -> np.ndarray:
    """Body-to-inertial rotation for Euler angles (roll, pitch, yaw)."""
    cr, cp, cy = np.cos(theta)
    sr, sp, sy = np.sin(theta)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


def rotation_matrix_derivs(theta: np.ndarray) -> np.ndarray:
    """Stacked partial derivatives dR/d(roll), dR/d(pitch), dR/d(yaw)."""
    cr, cp, cy = np.cos(theta)
    sr, sp, sy = np.sin(theta)
    dR_roll = np.array([
        [0.0, cy * sp * cr + sy * sr, -cy * sp * sr + sy * cr],
        [0.0, sy * sp * cr - cy * sr, -sy * sp * sr - cy * cr],
        [0.0, cp * cr, -cp * sr],
    ])
    dR_pitch = np.array([
        [-cy * sp, cy * cp * sr, cy * cp * cr],
        [-sy * sp, sy * cp * sr, sy * cp * cr],
        [-cp, -sp * sr, -sp * cr],
    ])
    dR_yaw = np.array([
        [-sy * cp, -sy * sp * sr - cy * cr, -sy * sp * cr + cy * sr],
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [0.0, 0.0, 0.0],
    ])
    return np.stack([dR_roll, dR_pitch, dR_yaw])


def euler_rate_matrix(theta: np.ndarray) -> np.ndarray:
    """H(theta) with omega_body = H @ theta_dot."""
    cr, cp, _ = np.cos(theta)
    sr, sp, _ = np.sin(theta)
    return np.array([
        [1.0, 0.0, -sp],
        [0.0, cr, sr * cp],
        [0.0, -sr, cr * cp],
    ])


def euler_rate_matrix_derivs(theta: np.ndarray) -> np.ndarray:
    """Stacked dH/d(roll), dH/d(pitch), dH/d(yaw) (the last is zero)."""
    cr, cp, _ = np.cos(theta)
    sr, sp, _ = np.sin(theta)
    dH_roll = np.array([
        [0.0, 0.0, 0.0],
        [0.0, -sr, cr * cp],
        [0.0, -cr, -sr * cp],
    ])
    dH_pitch = np.array([
        [0.0, 0.0, -cp],
        [0.0, 0.0, -sr * sp],
        [0.0, 0.0, -cr * sp],
    ])
    return np.stack([dH_roll, dH_pitch, np.zeros((3, 3))])


# ---------------------------------------------------------------------------
# legs
# ---------------------------------------------------------------------------

def leg_vector_body(phi: float, psi: float, l: float, mirror: float) -> np.ndarray:
    """Hip-to-foot vector in the body frame."""
    sp, cp = np.sin(psi), np.cos(psi)
    sf, cf = np.sin(phi), np.cos(phi)
    return np.array([l * sp, mirror * l * sf * cp, -l * cf * cp])


def leg_jacobian(phi: float, psi: float, l: float, mirror: float) -> np.ndarray:
    """3x3 Jacobian of the hip-to-foot vector wrt (phi, psi, l)."""
    sp, cp = np.sin(psi), np.cos(psi)
    sf, cf = np.sin(phi), np.cos(phi)
    return np.array([
        [0.0, l * cp, sp],
        [mirror * l * cf * cp, -mirror * l * sf * sp, mirror * sf * cp],
        [l * sf * cp, l * cf * sp, -cf * cp],
    ])


def leg_ik(p_rel_hip: np.ndarray, mirror: float) -> tuple[float, float, float]:
    """Closed-form inverse of ``leg_vector_body`` (assumes |psi| < pi/2)."""
    px, py, pz = p_rel_hip
    l = float(np.linalg.norm(p_rel_hip))
    if l < 1e-9:
        return 0.0, 0.0, 0.0
    r = float(np.hypot(py, pz))
    psi = float(np.arctan2(px, r))
    phi = float(mirror * np.arctan2(py, -pz))
    return phi, psi, l


def thrust_axis_body(phi: float, mirror: float) -> np.ndarray:
    """Unit thrust direction in the body frame (parallel to the hip
    sagittal joint axis after the frontal rotation)."""
    return np.array([0.0, mirror * np.cos(phi), np.sin(phi)])


def foot_positions_body(qk: np.ndarray, hip_offsets: np.ndarray) -> np.ndarray:
    """Body-frame foot positions (4, 3) for joint values qk (4, 3)."""
    out = np.empty((4, 3))
    for i in range(4):
        phi, psi, l = qk[i]
        out[i] = hip_offsets[i] + leg_vector_body(phi, psi, l, MIRROR[i])
    return out


def thruster_points_body(qk: np.ndarray, hip_offsets: np.ndarray,
                         offset: float) -> tuple[np.ndarray, np.ndarray]:
    """Body-frame thruster positions and thrust axes, both (4, 3)."""
    pos = np.empty((4, 3))
    axis = np.empty((4, 3))
    for i in range(4):
        phi, psi, _ = qk[i]
        pos[i] = hip_offsets[i] + leg_vector_body(phi, psi, offset, MIRROR[i])
        axis[i] = thrust_axis_body(phi, MIRROR[i])
    return pos, axis


def foot_position(p_b: np.ndarray, theta_b: np.ndarray, qk: np.ndarray,
                  hip_offsets: np.ndarray, i: int) -> np.ndarray:
    """Inertial foot position of leg i."""
    phi, psi, l = qk[i]
    s = hip_offsets[i] + leg_vector_body(phi, psi, l, MIRROR[i])
    return p_b + rotation_matrix(theta_b) @ s


def thruster_position(p_b: np.ndarray, theta_b: np.ndarray, qk: np.ndarray,
                      hip_offsets: np.ndarray, offset: float,
                      i: int) -> tuple[np.ndarray, np.ndarray]:
    """Inertial thruster position and unit thrust direction of leg i."""
    phi, psi, _ = qk[i]
    s = hip_offsets[i] + leg_vector_body(phi, psi, offset, MIRROR[i])
    R = rotation_matrix(theta_b)
    return p_b + R @ s, R @ thrust_axis_body(phi, MIRROR[i])
