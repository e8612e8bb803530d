"""Closed-loop mission execution on the reduced-order model."""

from mmloco.sim.gait import GaitParams, TrotGait
from mmloco.sim.trackers import FlightTracker, FlightGains, walk_command
from mmloco.sim.transform import TransformDirection, transform_sequence
from mmloco.sim.mission import (
    LocoMode,
    MissionFailure,
    MissionLog,
    MissionParams,
    run_mission,
    write_ledger_json,
    write_trajectory_csv,
)

__all__ = [
    "GaitParams", "TrotGait",
    "FlightTracker", "FlightGains", "walk_command",
    "TransformDirection", "transform_sequence",
    "LocoMode", "MissionFailure", "MissionLog", "MissionParams",
    "run_mission", "write_ledger_json", "write_trajectory_csv",
]
