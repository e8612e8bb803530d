"""Mode-tagged roadmap graphs: MM-PRM sampling and a uniform-grid baseline.

Edges are undirected but carry direction-dependent costs (the flight
potential term changes sign), so both per-direction costs are stored.
Walk edges require level endpoints: a step discontinuity in the supporting
surface is untraversable on foot, so mixed-height walking pairs are simply
not connected.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from mmloco import rng as rng_mod
from mmloco.geometry import (
    EnvironmentMap,
    points_free,
    sample_flying_node,
    sample_walking_node,
    segments_clear,
    walkable_height,
)
from mmloco.planner.costs import CostModel

LEVEL_TOL = 1e-9


class ModeTag(enum.IntEnum):
    Walking = 0
    Flying = 1


class EdgeKind(enum.IntEnum):
    Walk = 0
    Fly = 1
    Transition = 2


class GridTooLargeError(RuntimeError):
    """Uniform grid would exceed the node-count guard."""


@dataclass
class PRMConfig:
    R: float = 4.0               # neighbor radius, m
    N_w: int = 300
    N_f: int = 300
    seed: int = 0
    r_transition: float = 1.0    # max horizontal offset of a transition pair
    max_attempts_per_node: int = 100

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.N_w < 0 or self.N_f < 0:
            raise ValueError("node counts must be non-negative")


@dataclass
class RoadmapGraph:
    pos: np.ndarray                    # (N, 3)
    mode: np.ndarray                   # (N,) ModeTag values
    ea: np.ndarray                     # (M,) edge endpoint a
    eb: np.ndarray                     # (M,) edge endpoint b
    kind: np.ndarray                   # (M,) EdgeKind values
    cost_ab: np.ndarray                # (M,) Joules, a -> b
    cost_ba: np.ndarray                # (M,) Joules, b -> a
    _csr: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return int(self.pos.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.ea.shape[0])

    def csr(self):
        """Directed CSR adjacency (indptr, dst, cost, kind), built lazily."""
        if self._csr is None:
            src = np.concatenate([self.ea, self.eb])
            dst = np.concatenate([self.eb, self.ea])
            cst = np.concatenate([self.cost_ab, self.cost_ba])
            knd = np.concatenate([self.kind, self.kind])
            order = np.lexsort((dst, src))
            src, dst, cst, knd = src[order], dst[order], cst[order], knd[order]
            indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, dst, cst, knd)
        return self._csr

    def to_dict(self) -> dict:
        """JSON-ready export: {nodes: [...], edges: [...]}."""
        nodes = [
            {"id": int(i), "pos": [float(c) for c in self.pos[i]],
             "mode": ModeTag(int(self.mode[i])).name}
            for i in range(self.n_nodes)
        ]
        edges = [
            {"a": int(self.ea[j]), "b": int(self.eb[j]),
             "kind": EdgeKind(int(self.kind[j])).name,
             "cost": float(self.cost_ab[j])}
            for j in range(self.n_edges)
        ]
        return {"nodes": nodes, "edges": edges}


# ---------------------------------------------------------------------------
# edge validation shared by both builders
# ---------------------------------------------------------------------------

def _edges_clear(env: EnvironmentMap, pa: np.ndarray, pb: np.ndarray,
                 mode_a: np.ndarray, mode_b: np.ndarray) -> np.ndarray:
    """Clearance test for candidate edges with the robot's bounding sphere.

    Walking endpoints sit on the supporting surface, so they are lifted by
    one robot radius to the body center before sweeping the sphere; flying
    endpoints are already body centers.  Obstacles are inflated by the
    radius, with grazing contact counting as clear (consistent with the
    node samplers).
    """
    lift_a = np.where(mode_a == ModeTag.Walking, env.robot_radius, 0.0)
    lift_b = np.where(mode_b == ModeTag.Walking, env.robot_radius, 0.0)
    pa = pa.copy()
    pb = pb.copy()
    pa[:, 2] += lift_a
    pb[:, 2] += lift_b
    return segments_clear(env, pa, pb, margin=env.robot_radius)


# ---------------------------------------------------------------------------
# edge classification shared by both builders
# ---------------------------------------------------------------------------

def _edge_costs(pos_a: np.ndarray, pos_b: np.ndarray, mode_a: np.ndarray,
                mode_b: np.ndarray, model: CostModel, r_transition: float):
    """Vectorized edge classification.

    Returns (valid, kind, cost_ab, cost_ba) for candidate endpoint arrays.
    """
    d = np.linalg.norm(pos_b - pos_a, axis=1)
    dh = np.linalg.norm((pos_b - pos_a)[:, :2], axis=1)
    dz = pos_b[:, 2] - pos_a[:, 2]
    both_walk = (mode_a == ModeTag.Walking) & (mode_b == ModeTag.Walking)
    both_fly = (mode_a == ModeTag.Flying) & (mode_b == ModeTag.Flying)
    mixed = ~both_walk & ~both_fly

    kind = np.full(d.shape, EdgeKind.Walk, dtype=np.uint8)
    kind[both_fly] = EdgeKind.Fly
    kind[mixed] = EdgeKind.Transition

    valid = np.ones(d.shape, dtype=bool)
    valid[both_walk] = np.abs(dz[both_walk]) <= LEVEL_TOL
    valid[mixed] = dh[mixed] < r_transition

    k = model.fly_per_m
    w = model.m * model.g
    cost_ab = np.where(both_walk, model.c_walk_per_m * d,
                       np.maximum(0.0, k * d + w * dz))
    cost_ba = np.where(both_walk, cost_ab,
                       np.maximum(0.0, k * d - w * dz))
    trans_ab = (model.C_t + model.c_walk_per_m * dh
                + np.maximum(0.0, k * np.abs(dz) + w * dz))
    trans_ba = (model.C_t + model.c_walk_per_m * dh
                + np.maximum(0.0, k * np.abs(dz) - w * dz))
    cost_ab = np.where(mixed, trans_ab, cost_ab)
    cost_ba = np.where(mixed, trans_ba, cost_ba)
    return valid, kind, cost_ab, cost_ba


# ---------------------------------------------------------------------------
# MM-PRM
# ---------------------------------------------------------------------------

def build_mm_prm(env: EnvironmentMap, config: PRMConfig,
                 model: CostModel | None = None) -> RoadmapGraph:
    """Sample N_w walking then N_f flying nodes and connect each new node to
    every earlier node within radius R whose joining segment is clear."""
    model = model or CostModel()
    walk_rng = rng_mod.stream(config.seed, rng_mod.STREAM_WALK_SAMPLER)
    fly_rng = rng_mod.stream(config.seed, rng_mod.STREAM_FLY_SAMPLER)

    n_total = config.N_w + config.N_f
    pos = np.zeros((n_total, 3))
    mode = np.zeros(n_total, dtype=np.uint8)
    for n in range(n_total):
        if n < config.N_w:
            pos[n] = sample_walking_node(env, walk_rng,
                                         config.max_attempts_per_node)
            mode[n] = ModeTag.Walking
        else:
            pos[n] = sample_flying_node(env, fly_rng,
                                        config.max_attempts_per_node)
            mode[n] = ModeTag.Flying

    # connect all within-radius pairs in one batch, ordered (earlier, later)
    # lexicographically by the later node
    ii, jj = np.triu_indices(n_total, 1)
    near = np.linalg.norm(pos[ii] - pos[jj], axis=1) <= config.R
    ii, jj = ii[near], jj[near]
    order = np.lexsort((ii, jj))
    ii, jj = ii[order], jj[order]

    valid, knd, cab, cba = _edge_costs(pos[ii], pos[jj], mode[ii], mode[jj],
                                       model, config.r_transition)
    ii, jj = ii[valid], jj[valid]
    knd, cab, cba = knd[valid], cab[valid], cba[valid]
    clear = _edges_clear(env, pos[ii], pos[jj], mode[ii], mode[jj])

    return RoadmapGraph(
        pos, mode,
        ii[clear].astype(np.int64), jj[clear].astype(np.int64),
        knd[clear], cab[clear], cba[clear])


def insert_node(graph: RoadmapGraph, env: EnvironmentMap, p: np.ndarray,
                mode: ModeTag, config: PRMConfig,
                model: CostModel | None = None) -> tuple[RoadmapGraph, int]:
    """Append one node (e.g. a start or goal) using the PRM connection rule.

    Walking nodes are snapped onto the local supporting surface.
    Returns the extended graph and the new node id.
    """
    model = model or CostModel()
    p = np.asarray(p, dtype=float).copy()
    if mode == ModeTag.Walking:
        z = walkable_height(env, p[0], p[1])
        if z is None:
            raise ValueError(f"({p[0]}, {p[1]}) is not a walkable location")
        p[2] = z
    nid = graph.n_nodes
    pos = np.vstack([graph.pos, p[None, :]])
    modes = np.concatenate([graph.mode, [int(mode)]])

    dist = np.linalg.norm(graph.pos - p, axis=1)
    cand = np.nonzero(dist <= config.R)[0]
    ea, eb = [graph.ea], [graph.eb]
    knd, cab, cba = [graph.kind], [graph.cost_ab], [graph.cost_ba]
    if cand.size:
        pa = graph.pos[cand]
        pb = np.repeat(p[None, :], pa.shape[0], axis=0)
        mb = np.full(cand.shape, int(mode), dtype=np.uint8)
        valid, k, c_ab, c_ba = _edge_costs(pa, pb, graph.mode[cand], mb,
                                           model, config.r_transition)
        if np.any(valid):
            valid &= _edges_clear(env, pa, pb, graph.mode[cand], mb)
        sel = np.nonzero(valid)[0]
        if sel.size:
            ea.append(cand[sel])
            eb.append(np.full(sel.size, nid, dtype=np.int64))
            knd.append(k[sel])
            cab.append(c_ab[sel])
            cba.append(c_ba[sel])
    return RoadmapGraph(
        pos, modes,
        np.concatenate(ea), np.concatenate(eb),
        np.concatenate(knd).astype(np.uint8),
        np.concatenate(cab), np.concatenate(cba)), nid


def connect_endpoint_flights(graph: RoadmapGraph, env: EnvironmentMap,
                             endpoints: tuple[int, int], config: PRMConfig,
                             model: CostModel | None = None) -> RoadmapGraph:
    """Give mission endpoints direct flight options.

    A walking endpoint gains transition edges to every flying node within
    radius R with a clear segment, costed as one morph plus the diagonal
    flight; the two endpoints are joined directly whenever the straight
    segment between them is clear (a fly edge whose cost includes one morph
    per walking endpoint).  These edges are physically realizable routes, so
    adding them to the shared graph keeps the flight-restricted search an
    exact subset of the multi-modal one.
    """
    model = model or CostModel()
    k = model.fly_per_m
    w = model.m * model.g

    def fly(pa, pb):
        d = float(np.linalg.norm(pb - pa))
        return max(0.0, k * d + w * (pb[2] - pa[2]))

    ea, eb = [graph.ea], [graph.eb]
    knd, cab, cba = [graph.kind], [graph.cost_ab], [graph.cost_ba]
    flying = np.nonzero(graph.mode == ModeTag.Flying)[0]
    existing = set(zip(graph.ea.tolist(), graph.eb.tolist()))
    existing |= {(b, a) for a, b in existing}

    for e in endpoints:
        if graph.mode[e] != ModeTag.Walking or flying.size == 0:
            continue
        pe = graph.pos[e]
        near = flying[np.linalg.norm(graph.pos[flying] - pe, axis=1)
                      <= config.R]
        near = np.array([f for f in near if (e, int(f)) not in existing],
                        dtype=np.int64)
        if near.size == 0:
            continue
        pn = graph.pos[near]
        clear = _edges_clear(
            env, np.repeat(pe[None, :], near.size, axis=0), pn,
            np.full(near.size, ModeTag.Walking, dtype=np.uint8),
            np.full(near.size, ModeTag.Flying, dtype=np.uint8))
        for f in near[clear]:
            pf = graph.pos[f]
            ea.append(np.array([e], dtype=np.int64))
            eb.append(np.array([int(f)], dtype=np.int64))
            knd.append(np.array([EdgeKind.Transition], dtype=np.uint8))
            cab.append(np.array([model.C_t + fly(pe, pf)]))
            cba.append(np.array([model.C_t + fly(pf, pe)]))

    a, b = endpoints
    if a != b and (a, b) not in existing:
        pa, pb = graph.pos[a], graph.pos[b]
        if bool(_edges_clear(env, pa[None, :], pb[None, :],
                             graph.mode[a:a + 1], graph.mode[b:b + 1])[0]):
            morphs = model.C_t * sum(
                int(graph.mode[e] == ModeTag.Walking) for e in (a, b))
            ea.append(np.array([a], dtype=np.int64))
            eb.append(np.array([b], dtype=np.int64))
            knd.append(np.array([EdgeKind.Fly], dtype=np.uint8))
            cab.append(np.array([morphs + fly(pa, pb)]))
            cba.append(np.array([morphs + fly(pb, pa)]))

    return RoadmapGraph(
        graph.pos, graph.mode,
        np.concatenate(ea), np.concatenate(eb),
        np.concatenate(knd).astype(np.uint8),
        np.concatenate(cab), np.concatenate(cba))


# ---------------------------------------------------------------------------
# uniform grid baseline
# ---------------------------------------------------------------------------

MAX_GRID_NODES = 1_000_000


def build_uniform_grid(env: EnvironmentMap, spacing: float,
                       model: CostModel | None = None,
                       r_transition: float = 1.0) -> RoadmapGraph:
    """Lattice discretization: one walking node per column on the supporting
    surface, flying nodes at lattice altitudes above it, 26-neighbor
    connectivity filtered by exact segment checks."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    model = model or CostModel()
    lo, hi = env.bounds.min, env.bounds.max

    def axis(a, b):
        n = int(np.floor((b - a) / spacing + 1e-9)) + 1
        return a + spacing * np.arange(n)

    xs, ys, zs = axis(lo[0], hi[0]), axis(lo[1], hi[1]), axis(lo[2], hi[2])
    nx, ny, nz = len(xs), len(ys), len(zs)
    if nx * ny * nz > MAX_GRID_NODES:
        raise GridTooLargeError(
            f"uniform grid would have {nx * ny * nz} lattice points "
            f"(limit {MAX_GRID_NODES}); increase the spacing")

    # per-column supporting surface
    surface = np.full((nx, ny), np.nan)
    for i in range(nx):
        for j in range(ny):
            z = walkable_height(env, xs[i], ys[j])
            if z is not None:
                surface[i, j] = z

    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1).reshape(-1, 3)
    surf3 = np.repeat(surface[:, :, None], nz, axis=2)

    # walking node: lowest free lattice level at/above the surface, snapped
    # onto the surface; flying nodes: lattice points clear of the surface
    ksurf = np.where(np.isnan(surface), -1,
                     np.ceil((surface - lo[2]) / spacing - 1e-9)).astype(int)
    K = np.broadcast_to(np.arange(nz), (nx, ny, nz))
    is_walk = (K == ksurf[:, :, None]) & (ksurf[:, :, None] >= 0)
    free_fly = points_free(env, pts, margin=env.robot_radius).reshape(nx, ny, nz)
    is_fly = (free_fly & (Z > env.z_gnd + env.eps_air - 1e-9)
              & (np.isnan(surf3) | (Z > surf3 + env.eps_air - 1e-9))
              & ~is_walk)

    present = is_walk | is_fly
    ids = np.full((nx, ny, nz), -1, dtype=np.int64)
    ids[present] = np.arange(int(present.sum()))
    pos = pts[present.reshape(-1)].copy()
    # snap walking nodes onto the surface
    widx = ids[is_walk]
    pos[widx, 2] = surface[np.nonzero(is_walk.any(axis=2))]
    modes = np.zeros(pos.shape[0], dtype=np.uint8)
    modes[:] = ModeTag.Flying
    modes[widx] = ModeTag.Walking

    # 26-neighborhood, half the offsets to avoid duplicates
    offsets = [(dx, dy, dz) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
               for dz in (-1, 0, 1) if (dx, dy, dz) > (0, 0, 0)]
    ea, eb, knd, cab, cba = [], [], [], [], []
    for dx, dy, dz in offsets:
        a = ids[max(0, -dx):nx - max(0, dx),
                max(0, -dy):ny - max(0, dy),
                max(0, -dz):nz - max(0, dz)].reshape(-1)
        b = ids[max(0, dx):nx - max(0, -dx),
                max(0, dy):ny - max(0, -dy),
                max(0, dz):nz - max(0, -dz)].reshape(-1)
        ok = (a >= 0) & (b >= 0)
        a, b = a[ok], b[ok]
        if a.size == 0:
            continue
        pa, pb = pos[a], pos[b]
        valid, k, c_ab, c_ba = _edge_costs(pa, pb, modes[a], modes[b],
                                           model, r_transition)
        a, b = a[valid], b[valid]
        pa, pb = pa[valid], pb[valid]
        k, c_ab, c_ba = k[valid], c_ab[valid], c_ba[valid]
        clear = _edges_clear(env, pa, pb, modes[a], modes[b])
        ea.append(a[clear])
        eb.append(b[clear])
        knd.append(k[clear])
        cab.append(c_ab[clear])
        cba.append(c_ba[clear])

    def cat(parts, dtype=None):
        if not parts:
            return np.zeros(0, dtype=dtype or float)
        out = np.concatenate(parts)
        return out.astype(dtype) if dtype else out

    return RoadmapGraph(pos, modes, cat(ea, np.int64), cat(eb, np.int64),
                        cat(knd, np.uint8), cat(cab), cat(cba))
