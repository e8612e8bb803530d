"""Physical parameters of the reduced-order robot and the ground model.

The defaults below describe a ~5 kg morphing quadruped.  The contact
stiffness and integrator step are chosen together: with k_gp = 2e4 N/m a
single supporting foot oscillates at ~20 Hz, resolved by 50 RK4 steps per
period at dt = 1e-3 s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RobotParams:
    """Mass properties and mounting geometry (body frame, z up, x forward)."""

    m: float = 5.0                      # kg
    inertia: np.ndarray = field(
        default_factory=lambda: np.diag([0.05, 0.08, 0.10]))  # kg m^2
    hip_offsets: np.ndarray = field(default_factory=lambda: np.array([
        # FL, FR, RL, RR
        [0.22, 0.14, 0.0],
        [0.22, -0.14, 0.0],
        [-0.22, 0.14, 0.0],
        [-0.22, -0.14, 0.0],
    ]))
    thruster_offset: float = 0.12       # m along the leg from the hip
    g: float = 9.81                     # m/s^2
    l_min: float = 0.10                 # m
    l_max: float = 0.34                 # m
    l_nominal: float = 0.26             # m, standing leg length
    gear_height: float = 0.12           # m, body height on landing gear
    gear_offsets: np.ndarray = field(default_factory=lambda: np.array([
        # landing-gear contact points under the body corners
        [0.16, 0.10, -0.12],
        [0.16, -0.10, -0.12],
        [-0.16, 0.10, -0.12],
        [-0.16, -0.10, -0.12],
    ]))
    thrust_max: float = 30.0            # N per rotor
    yaw_moment_coeff: float = 0.02      # N m of yaw drag torque per N thrust

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("mass must be positive")
        self.inertia = np.asarray(self.inertia, dtype=float)
        w = np.linalg.eigvalsh(0.5 * (self.inertia + self.inertia.T))
        if np.any(w <= 0):
            raise ValueError("inertia tensor must be positive definite")
        self.hip_offsets = np.asarray(self.hip_offsets, dtype=float).reshape(4, 3)
        self.gear_offsets = np.asarray(self.gear_offsets, dtype=float).reshape(4, 3)


@dataclass
class GroundModel:
    """Compliant normal contact plus Stribeck tangential friction."""

    k_gp: float = 2.0e4     # N/m
    k_gd: float = 200.0     # N s/m
    mu_c: float = 0.6       # dry (Coulomb)
    mu_s: float = 0.8       # static (Stribeck peak)
    mu_v: float = 0.1       # N s/m, viscous
    v_s: float = 0.05       # m/s, Stribeck velocity
    # regularization band of the tangential law: sign(v) is smoothed to
    # tanh(v / v_t) so near-rest contact is viscous instead of chattering
    # and the friction force is differentiable for constraint gradients.
    # With v_t = v_s the smoothed coefficient stribeck(v) tanh(v/v_t) never
    # exceeds mu_c, so the pyramid margin is governed by the viscous term.
    v_t: float = 0.05       # m/s

    def __post_init__(self):
        if self.k_gp <= 0 or self.k_gd <= 0:
            raise ValueError("contact gains must be positive")
        if not 0 <= self.mu_c <= self.mu_s:
            raise ValueError("need 0 <= mu_c <= mu_s")
        if self.v_s <= 0 or self.v_t <= 0:
            raise ValueError("v_s and v_t must be positive")


@dataclass
class ServoLimits:
    """Rate limits applied to commanded joint trajectories."""

    angle_rate: float = 8.0     # rad/s
    length_rate: float = 0.8    # m/s
    # first-order tracking bandwidth used when predicting commanded foot
    # velocities for the friction constraints
    tracking_rate: float = 30.0  # 1/s
