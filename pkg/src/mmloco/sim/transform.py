"""Walking <-> flying transformation sequences.

A fixed-duration, three-phase joint trajectory: crouch until the landing
gear carries the body, rotate the hip frontal joints into the UAV pose,
then set the leg lengths.  ToGround runs the exact reverse.
"""

from __future__ import annotations

import enum

import numpy as np

from mmloco.rom.params import RobotParams

T_TRANSFORM = 4.0          # s, total sequence duration
PHASE_SPLIT = (0.4, 0.8)   # fractions of t_t ending crouch / hip rotation
STANCE_LENGTH = 0.24       # m, standing leg length (matches the gait height)


class TransformDirection(enum.Enum):
    ToAir = "ToAir"
    ToGround = "ToGround"


def _interp(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    s = float(np.clip(s, 0.0, 1.0))
    # smoothstep keeps joint rates continuous at the phase boundaries
    s = s * s * (3.0 - 2.0 * s)
    return a + (b - a) * s


def transform_sequence(qk_start: np.ndarray, direction: TransformDirection,
                       params: RobotParams | None = None,
                       t_t: float = T_TRANSFORM):
    """Returns ``qk_target(t)`` for t in [0, t_t], plus the final pose.

    ToAir: crouch (lengths to l_min, angles to zero) -> hip frontal joints
    to +pi/2 -> lengths to l_nominal.  ToGround reverses the phases from
    the UAV pose back to ``qk_start``-like standing with the given lengths.
    """
    params = params or RobotParams()
    qk_start = np.array(qk_start, dtype=float)

    crouch = np.column_stack([np.zeros(4), np.zeros(4),
                              np.full(4, params.l_min)])
    folded = np.column_stack([np.full(4, np.pi / 2), np.zeros(4),
                              np.full(4, params.l_min)])
    uav = np.column_stack([np.full(4, np.pi / 2), np.zeros(4),
                           np.full(4, params.l_nominal)])
    stand = np.column_stack([np.zeros(4), np.zeros(4),
                             np.full(4, STANCE_LENGTH)])

    if direction == TransformDirection.ToAir:
        keyframes = [qk_start, crouch, folded, uav]
    else:
        keyframes = [qk_start, folded, crouch, stand]
    f1, f2 = PHASE_SPLIT

    def qk_target(t: float) -> np.ndarray:
        s = float(np.clip(t / t_t, 0.0, 1.0))
        if s < f1:
            return _interp(keyframes[0], keyframes[1], s / f1)
        if s < f2:
            return _interp(keyframes[1], keyframes[2], (s - f1) / (f2 - f1))
        return _interp(keyframes[2], keyframes[3], (s - f2) / (1.0 - f2))

    return qk_target, keyframes[-1]
