"""Minimum-energy path search over mode-tagged roadmap graphs.

``astar`` is the production search; ``dijkstra_cost`` is the zero-heuristic
reference used to cross-check optimality.  Ties in f are broken by larger g
(deeper nodes first) and then by node id, so expansion order is
deterministic for a fixed graph.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from mmloco.planner.costs import CostModel, heuristic_cost
from mmloco.planner.roadmap import EdgeKind, ModeTag, RoadmapGraph


class Unreachable(RuntimeError):
    """No path exists between the requested nodes."""


@dataclass
class MissionPlan:
    """An energy-optimal route through a roadmap."""

    node_ids: list[int]
    positions: np.ndarray          # (K, 3)
    modes: list[ModeTag]
    edge_kinds: list[EdgeKind]     # (K-1,)
    edge_costs: list[float]        # (K-1,) Joules
    total_cost: float              # Joules
    n_transitions: int = field(init=False)

    def __post_init__(self):
        # Each edge contributes one morph per endpoint whose node mode
        # differs from the edge's travel mode; a direct flight between two
        # walking nodes therefore counts two.
        n = 0
        for j, k in enumerate(self.edge_kinds):
            if k == EdgeKind.Transition:
                n += 1
            elif k == EdgeKind.Fly:
                n += int(self.modes[j] == ModeTag.Walking)
                n += int(self.modes[j + 1] == ModeTag.Walking)
        self.n_transitions = n

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": int(i), "pos": [float(c) for c in self.positions[j]],
                 "mode": ModeTag(self.modes[j]).name}
                for j, i in enumerate(self.node_ids)
            ],
            "edges": [
                {"kind": EdgeKind(k).name, "cost": float(c)}
                for k, c in zip(self.edge_kinds, self.edge_costs)
            ],
            "total_cost": float(self.total_cost),
            "n_transitions": int(self.n_transitions),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MissionPlan":
        nodes = doc["nodes"]
        edges = doc["edges"]
        if len(edges) != max(len(nodes) - 1, 0):
            raise ValueError("plan edges must connect consecutive nodes")
        return cls(
            node_ids=[int(n["id"]) for n in nodes],
            positions=np.array([n["pos"] for n in nodes],
                               dtype=float).reshape(-1, 3),
            modes=[ModeTag[n["mode"]] for n in nodes],
            edge_kinds=[EdgeKind[e["kind"]] for e in edges],
            edge_costs=[float(e["cost"]) for e in edges],
            total_cost=float(doc["total_cost"]))


def heuristic(graph: RoadmapGraph, goal: int,
              model: CostModel) -> np.ndarray:
    """Per-node consistent cost-to-go lower bounds toward ``goal``."""
    gpos = graph.pos[goal]
    dh = np.linalg.norm(graph.pos[:, :2] - gpos[:2], axis=1)
    dz = graph.pos[:, 2] - gpos[2]
    k = model.fly_per_m
    w = model.m * model.g
    vert = np.maximum(0.0, k * np.abs(dz) - w * dz)
    return np.maximum(model.c_walk_per_m * dh, vert)


def _search(graph: RoadmapGraph, start: int, goal: int,
            h: np.ndarray | None):
    """Shared A*/Dijkstra core; returns (dist, parent, parent_edge_kind)."""
    n = graph.n_nodes
    if not (0 <= start < n and 0 <= goal < n):
        raise ValueError("start/goal node id out of range")
    indptr, dst, cost, kind = graph.csr()
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    pkind = np.full(n, -1, dtype=np.int8)
    closed = np.zeros(n, dtype=bool)
    dist[start] = 0.0
    h0 = float(h[start]) if h is not None else 0.0
    heap = [(h0, 0.0, start)]
    while heap:
        f, negg, u = heapq.heappop(heap)
        if closed[u]:
            continue
        closed[u] = True
        if u == goal:
            return dist, parent, pkind
        du = dist[u]
        for j in range(indptr[u], indptr[u + 1]):
            v = int(dst[j])
            if closed[v]:
                continue
            nd = du + float(cost[j])
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                pkind[v] = kind[j]
                fv = nd + (float(h[v]) if h is not None else 0.0)
                heapq.heappush(heap, (fv, -nd, v))
    raise Unreachable(f"node {goal} is not reachable from node {start}")


def _extract(graph: RoadmapGraph, start: int, goal: int, dist, parent,
             pkind) -> MissionPlan:
    ids = [goal]
    kinds = []
    while ids[-1] != start:
        u = ids[-1]
        kinds.append(EdgeKind(int(pkind[u])))
        ids.append(int(parent[u]))
    ids.reverse()
    kinds.reverse()
    costs = [float(dist[b] - dist[a]) for a, b in zip(ids, ids[1:])]
    return MissionPlan(
        node_ids=ids,
        positions=graph.pos[ids].copy(),
        modes=[ModeTag(int(graph.mode[i])) for i in ids],
        edge_kinds=kinds,
        edge_costs=costs,
        total_cost=float(dist[goal]))


def astar(graph: RoadmapGraph, start: int, goal: int,
          model: CostModel | None = None) -> MissionPlan:
    """Energy-optimal path from ``start`` to ``goal`` node ids."""
    model = model or CostModel()
    h = heuristic(graph, goal, model)
    dist, parent, pkind = _search(graph, start, goal, h)
    return _extract(graph, start, goal, dist, parent, pkind)


def dijkstra_cost(graph: RoadmapGraph, start: int, goal: int) -> float:
    """Optimal path cost by plain Dijkstra (reference for A* checks)."""
    dist, _, _ = _search(graph, start, goal, None)
    return float(dist[goal])


def flight_only_cost(graph: RoadmapGraph, start: int, goal: int) -> float:
    """Optimal cost when locomotion is restricted to flight.

    The search keeps the graph's Fly edges plus transitions that touch the
    start or goal node (morph once to take off, once to land); walk edges
    and interior transitions are excluded.  Because the kept edges are a
    subset of the full graph, this cost can never undercut the multi-modal
    optimum.  Raises ``Unreachable`` if no flight route exists.
    """
    if start == goal:
        return 0.0
    indptr, dst, cost, kind = graph.csr()
    src = np.repeat(np.arange(graph.n_nodes), np.diff(indptr))
    keep = (kind == EdgeKind.Fly) | (
        (kind == EdgeKind.Transition)
        & (np.isin(src, (start, goal)) | np.isin(dst, (start, goal))))
    # rebuild the directed CSR on the filtered records (costs are
    # directional, so they must not be mirrored)
    src, dst, cost, kind = src[keep], dst[keep], cost[keep], kind[keep]
    sub_indptr = np.zeros(graph.n_nodes + 1, dtype=np.int64)
    np.add.at(sub_indptr, src + 1, 1)
    np.cumsum(sub_indptr, out=sub_indptr)
    sub = RoadmapGraph(graph.pos, graph.mode,
                       np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64),
                       np.zeros(0, dtype=np.uint8), np.zeros(0), np.zeros(0),
                       _csr=(sub_indptr, dst, cost, kind))
    dist, _, _ = _search(sub, start, goal, None)
    return float(dist[goal])
