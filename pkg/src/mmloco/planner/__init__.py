"""Mode-tagged roadmaps and minimum-energy path search."""

from mmloco.planner.costs import (
    CostModel,
    fly_edge_cost,
    heuristic_cost,
    transition_cost,
    transition_edge_cost,
    walk_edge_cost,
)
from mmloco.planner.roadmap import (
    EdgeKind,
    GridTooLargeError,
    ModeTag,
    PRMConfig,
    RoadmapGraph,
    build_mm_prm,
    build_uniform_grid,
    connect_endpoint_flights,
    insert_node,
)
from mmloco.planner.search import (
    MissionPlan,
    Unreachable,
    astar,
    dijkstra_cost,
    flight_only_cost,
    heuristic,
)

__all__ = [
    "CostModel", "walk_edge_cost", "fly_edge_cost", "transition_cost",
    "transition_edge_cost", "heuristic_cost",
    "ModeTag", "EdgeKind", "PRMConfig", "RoadmapGraph", "GridTooLargeError",
    "build_mm_prm", "build_uniform_grid", "connect_endpoint_flights",
    "insert_node",
    "MissionPlan", "Unreachable", "astar", "dijkstra_cost",
    "flight_only_cost", "heuristic",
]
