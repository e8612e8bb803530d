"""Reduced-order model: single 6-DOF body with four massless 3-DOF legs."""

from mmloco.rom.params import GroundModel, RobotParams, ServoLimits
from mmloco.rom.kinematics import (
    LEG_NAMES,
    MIRROR,
    euler_rate_matrix,
    foot_position,
    foot_positions_body,
    leg_ik,
    leg_vector_body,
    rotation_matrix,
    thruster_position,
)
from mmloco.rom.dynamics import (
    BodyState,
    ForceSet,
    IntegrationDivergedError,
    LegKinematics,
    RobotState,
    Simulator,
    SingularConfigurationError,
    bias_forces,
    generalized_forces,
    ground_reaction,
    joint_power,
    mass_matrix,
)

__all__ = [
    "GroundModel", "RobotParams", "ServoLimits",
    "LEG_NAMES", "MIRROR", "euler_rate_matrix", "rotation_matrix",
    "leg_vector_body", "foot_positions_body", "foot_position",
    "thruster_position", "leg_ik",
    "BodyState", "LegKinematics", "RobotState", "ForceSet", "Simulator",
    "mass_matrix", "bias_forces", "ground_reaction", "generalized_forces",
    "joint_power", "SingularConfigurationError", "IntegrationDivergedError",
]
