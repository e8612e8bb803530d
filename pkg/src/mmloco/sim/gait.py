"""Trot gait reference generator.

Two diagonal leg pairs (FL+RR, FR+RL) alternate with a 50% duty cycle.
References are body-frame foot positions: stance feet sweep backward so
ground friction propels the body, swing feet return along a half-ellipse.
Body height and attitude are regulated through the stance feet's vertical
references.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmloco.rom.dynamics import RobotState
from mmloco.rom.params import RobotParams

# diagonal pairs by leg index (FL, FR, RL, RR)
PAIR_A = (0, 3)
PAIR_B = (1, 2)


@dataclass
class GaitParams:
    frequency: float = 2.0       # full gait cycles per second
    stride: float = 0.12         # m advanced per cycle at full speed
    duty: float = 0.5            # stance fraction of the cycle per pair
    swing_height: float = 0.04   # m, swing apex
    body_height: float = 0.24    # m, body center above the support surface
    max_yaw_rate: float = 0.6    # rad/s commanded in-place turn rate
    # optional attitude regulation through stance-foot height references;
    # zero by default -- the compliant contact is self-stabilizing at this
    # scale and active correction pumps energy into the support diagonal
    k_roll: float = 0.0
    d_roll: float = 0.0
    k_pitch: float = 0.0
    d_pitch: float = 0.0

    @property
    def cycle(self) -> float:
        return 1.0 / self.frequency

    @property
    def speed(self) -> float:
        """Nominal forward speed at full stride."""
        return self.stride * self.frequency


class TrotGait:
    """Stateful reference generator; call ``foot_references`` once per
    control tick with monotonically increasing time."""

    def __init__(self, gait: GaitParams | None = None,
                 robot: RobotParams | None = None):
        self.p = gait or GaitParams()
        self.robot = robot or RobotParams()

    def _neutral_xy(self) -> np.ndarray:
        return self.robot.hip_offsets[:, :2].copy()

    def foot_references(self, t: float, v_frac: float, yaw_rate: float,
                        state: RobotState) -> np.ndarray:
        """Body-frame foot-position references (4, 3) at gait time t.

        ``v_frac`` in [0, 1] scales the stride; ``yaw_rate`` (rad/s) is
        superposed as a rotation of the footprint.
        """
        p = self.p
        phase = (t * p.frequency) % 1.0
        v_frac = float(np.clip(v_frac, 0.0, 1.0))
        yaw_rate = float(np.clip(yaw_rate, -p.max_yaw_rate, p.max_yaw_rate))

        # per-pair phase in [0, 1): stance during [0, duty), swing after
        refs = np.zeros((4, 3))
        neutral = self._neutral_xy()
        stance_time = p.duty * p.cycle
        half_x = 0.25 * v_frac * p.stride          # fore-aft excursion
        half_a = 0.5 * yaw_rate * stance_time      # yaw excursion, rad

        roll, pitch = state.body.theta_b[0], state.body.theta_b[1]
        roll_rate, pitch_rate = state.body.omega_b[0], state.body.omega_b[1]

        for i in range(4):
            local = phase if i in PAIR_A else (phase + 0.5) % 1.0
            in_stance = local < p.duty
            if in_stance:
                s = local / p.duty                  # 0 -> 1 through stance
                u = (1.0 - 2.0 * s) * half_x
                a = (1.0 - 2.0 * s) * half_a
                lift = 0.0
            else:
                s = (local - p.duty) / (1.0 - p.duty)
                u = (2.0 * s - 1.0) * half_x
                a = (2.0 * s - 1.0) * half_a
                # sin^2 profile: zero vertical velocity at lift-off and
                # touchdown, so footfalls do not hammer the contact springs
                lift = p.swing_height * np.sin(np.pi * s) ** 2

            ca, sa = np.cos(a), np.sin(a)
            x0, y0 = neutral[i]
            refs[i, 0] = ca * x0 - sa * y0 + u
            refs[i, 1] = sa * x0 + ca * y0
            # vertical: leg extension keeps the body at body_height above
            # the surface (contact compliance self-regulates the residual)
            refs[i, 2] = -p.body_height + lift
            if in_stance:
                # vertical-force redistribution: positive roll lifts the +y
                # side, so +y legs shorten and -y legs extend (and the
                # mirror-image rule about y for pitch)
                refs[i, 2] += (p.k_roll * roll + p.d_roll * roll_rate) \
                    * np.sign(self.robot.hip_offsets[i, 1])
                refs[i, 2] -= (p.k_pitch * pitch + p.d_pitch * pitch_rate) \
                    * np.sign(self.robot.hip_offsets[i, 0])
        return refs
