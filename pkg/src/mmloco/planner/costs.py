"""Per-edge energy costs for walking, flying and morphing.

Flying an edge of length d between altitudes z1, z2 costs
P_f * d / v_f + m g (z2 - z1), clamped at zero so descents never produce
negative edge weights.  Walking costs a calibrated constant per meter.
A transformation costs a calibrated constant C_t; a transition edge adds
the walk cost of its horizontal offset and the vertical flight cost of its
altitude gap, so the robot "walks under the flying node, morphs, and climbs".

The cost-to-go estimate used by A* is the maximum of two lower bounds: the
flat-ground walk cost of the horizontal distance, and the vertical flight
cost of the altitude gap.  Each bound is consistent on its own under the
constructor's admissibility condition (see ``CostModel``), and the max of
consistent heuristics is consistent, which keeps A* exactly optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class CostModel:
    """Energy-rate constants.  Walking and morphing constants are calibrated
    from reduced-order rollouts (see mmloco.calibrate)."""

    c_walk_per_m: float = 50.0   # J/m, calibrated steady-trot energy rate
    P_f: float = 400.0           # W, hover power
    v_f: float = 2.0             # m/s, forward flight speed
    C_t: float = 20.0            # J, one transformation, calibrated
    m: float = 5.0               # kg
    g: float = 9.81              # m/s^2

    def __post_init__(self):
        for name in ("c_walk_per_m", "P_f", "v_f", "C_t", "m", "g"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        k = self.P_f / self.v_f          # J/m of level flight
        w = self.m * self.g              # J/m of pure ascent
        if k <= w:
            raise ValueError(
                "hover energy rate P_f/v_f must exceed m*g for the heuristic "
                f"to stay admissible (got {k:.1f} <= {w:.1f})")
        # Steep clamped descents still cover horizontal ground at rate
        # sqrt(k^2 - w^2); walking must not be estimated cheaper than that.
        limit = math.sqrt(k * k - w * w)
        if self.c_walk_per_m > limit:
            raise ValueError(
                f"c_walk_per_m={self.c_walk_per_m:.1f} exceeds the "
                f"admissibility limit {limit:.1f} J/m")

    @property
    def fly_per_m(self) -> float:
        return self.P_f / self.v_f


def walk_edge_cost(d: float, model: CostModel) -> float:
    """Energy of walking a level edge of length d."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    return model.c_walk_per_m * d


def fly_edge_cost(d: float, z1: float, z2: float, model: CostModel) -> float:
    """Energy of flying an edge of length d from altitude z1 to z2 (>= 0)."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    return max(0.0, model.fly_per_m * d + model.m * model.g * (z2 - z1))


def transition_cost(model: CostModel) -> float:
    """Energy of one walking <-> flying transformation."""
    return model.C_t


def transition_edge_cost(dh: float, z1: float, z2: float,
                         model: CostModel) -> float:
    """Energy of a transition edge: morph plus the horizontal walk and
    vertical flight legs between the two endpoints."""
    return (model.C_t + walk_edge_cost(dh, model)
            + fly_edge_cost(abs(z2 - z1), z1, z2, model))


def heuristic_cost(pos: "np.ndarray", goal: "np.ndarray",
                   model: CostModel) -> float:
    """Consistent lower bound on the remaining energy to the goal."""
    dx = pos[0] - goal[0]
    dy = pos[1] - goal[1]
    dh = math.hypot(dx, dy)
    dz = abs(pos[2] - goal[2])
    vert = fly_edge_cost(dz, pos[2], goal[2], model)
    return max(model.c_walk_per_m * dh, vert)
