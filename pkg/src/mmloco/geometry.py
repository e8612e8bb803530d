"""3D world model: axis-aligned box obstacles, walkable surfaces, sampling.

Conventions (pinned for determinism):
  * right-handed frame, z up, units meters;
  * obstacles are closed axis-aligned boxes; free space is the closed
    complement of their open interiors, so grazing contact counts as free;
  * all queries are pure; sampling consumes a caller-owned Philox stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Vec3 = np.ndarray  # shape (3,), float64


class SamplingBudgetError(RuntimeError):
    """Raised when rejection sampling exhausts its attempt budget."""


def vec3(x: float, y: float, z: float) -> Vec3:
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite Vec3 components: {v}")
    return v


@dataclass(frozen=True)
class Box3:
    """Closed axis-aligned box. ``walkable_top`` marks the top face as a
    supporting surface the robot may stand on."""

    min: Vec3
    max: Vec3
    walkable_top: bool = False

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=float)
        hi = np.asarray(self.max, dtype=float)
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("Box3 corners must be 3-vectors")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("Box3 corners must be finite")
        if np.any(lo > hi):
            raise ValueError(f"Box3 min must be <= max componentwise: {lo} vs {hi}")

    def contains_open(self, p: Vec3) -> bool:
        """True iff p lies strictly inside the box interior."""
        return bool(np.all(p > self.min) and np.all(p < self.max))

    def footprint_contains(self, x: float, y: float) -> bool:
        """True iff (x, y) is within the closed xy footprint."""
        return self.min[0] <= x <= self.max[0] and self.min[1] <= y <= self.max[1]


@dataclass
class EnvironmentMap:
    """World bounds, base ground plane at ``z_gnd`` and box obstacles.

    ``robot_radius`` is the bounding-sphere radius used by the samplers'
    clearance checks; ``eps_air`` is the minimum flight clearance above the
    base ground so flying nodes never coincide with walking nodes.
    """

    bounds: Box3
    z_gnd: float = 0.0
    obstacles: list[Box3] = field(default_factory=list)
    robot_radius: float = 0.5
    eps_air: float = 0.25

    # cached obstacle arrays for vectorized queries
    _lo: np.ndarray = field(init=False, repr=False)
    _hi: np.ndarray = field(init=False, repr=False)
    _walkable: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.bounds.min[2] <= self.z_gnd <= self.bounds.max[2]:
            raise ValueError("z_gnd must lie within bounds")
        for b in self.obstacles:
            if np.any(b.max < self.bounds.min) or np.any(b.min > self.bounds.max):
                raise ValueError(f"obstacle {b} does not intersect bounds")
        k = len(self.obstacles)
        self._lo = np.array([b.min for b in self.obstacles], dtype=float).reshape(k, 3)
        self._hi = np.array([b.max for b in self.obstacles], dtype=float).reshape(k, 3)
        self._walkable = np.array([b.walkable_top for b in self.obstacles], dtype=bool)


# ---------------------------------------------------------------------------
# point / segment queries
# ---------------------------------------------------------------------------

def points_free(env: EnvironmentMap, pts: np.ndarray, margin: float = 0.0) -> np.ndarray:
    """Vectorized free-space test for an (N, 3) array of points.

    A point is free iff it lies inside the world bounds (closed) and strictly
    outside every obstacle interior inflated by ``margin``.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    ok = np.all(pts >= env.bounds.min, axis=1) & np.all(pts <= env.bounds.max, axis=1)
    if len(env.obstacles):
        lo = env._lo[None, :, :] - margin  # (1, K, 3)
        hi = env._hi[None, :, :] + margin
        inside = np.all(pts[:, None, :] > lo, axis=2) & np.all(pts[:, None, :] < hi, axis=2)
        ok &= ~np.any(inside, axis=1)
    return ok


def is_point_free(env: EnvironmentMap, p: Vec3, margin: float = 0.0) -> bool:
    """True iff ``p`` is inside bounds and outside every obstacle interior.

    Obstacle boundaries count as free.
    """
    return bool(points_free(env, np.asarray(p, dtype=float)[None, :], margin)[0])


def segments_clear(env: EnvironmentMap, a: np.ndarray, b: np.ndarray,
                   margin: float = 0.0) -> np.ndarray:
    """Vectorized exact segment-vs-box interior test for (N, 3) endpoints.

    Uses the slab method on open box interiors: a segment is clear iff the
    open parameter interval where it is strictly inside a box does not meet
    [0, 1].  Face-grazing segments are therefore clear.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    n = a.shape[0]
    clear = np.ones(n, dtype=bool)
    if not len(env.obstacles):
        return clear
    d = b - a
    para = d == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(len(env.obstacles)):
            lo = env._lo[k] - margin
            hi = env._hi[k] + margin
            t0 = (lo - a) / d
            t1 = (hi - a) / d
            tlo = np.minimum(t0, t1)
            thi = np.maximum(t0, t1)
            # axes parallel to the segment: strictly-inside test on position
            inside_para = (a > lo) & (a < hi)
            tlo = np.where(para, np.where(inside_para, -np.inf, np.inf), tlo)
            thi = np.where(para, np.where(inside_para, np.inf, -np.inf), thi)
            enter = tlo.max(axis=1)
            exit_ = thi.min(axis=1)
            hits = (enter < exit_) & (np.maximum(enter, 0.0) < np.minimum(exit_, 1.0))
            clear &= ~hits
    return clear


def segment_clear(env: EnvironmentMap, a: Vec3, b: Vec3, margin: float = 0.0) -> bool:
    """True iff the closed segment ab does not intersect any obstacle interior."""
    return bool(segments_clear(env, np.asarray(a, float)[None, :],
                               np.asarray(b, float)[None, :], margin)[0])


# ---------------------------------------------------------------------------
# walkable surfaces
# ---------------------------------------------------------------------------

def walkable_height(env: EnvironmentMap, x: float, y: float) -> float | None:
    """Highest supporting surface at (x, y), or None if that height is blocked.

    The surface is the base ground or the top of the highest walkable box
    whose footprint contains (x, y).  Returns None when the robot cannot
    stand there: the surface point or the clearance point one robot radius
    above is inside an obstacle.
    """
    if not (env.bounds.min[0] <= x <= env.bounds.max[0]
            and env.bounds.min[1] <= y <= env.bounds.max[1]):
        return None
    surface = env.z_gnd
    for k, box in enumerate(env.obstacles):
        if env._walkable[k] and box.footprint_contains(x, y):
            surface = max(surface, float(box.max[2]))
    if surface > env.bounds.max[2]:
        return None
    foot = np.array([x, y, surface])
    head = np.array([x, y, surface + env.robot_radius])
    if not is_point_free(env, foot):
        return None
    if not is_point_free(env, head, margin=env.robot_radius):
        return None
    return float(surface)


def support_height(env: EnvironmentMap, x: float, y: float, z: float,
                   snap: float = 0.05) -> float:
    """Contact surface height under a foot hovering at (x, y, z).

    Highest box top at or below z + snap whose footprint contains (x, y);
    falls back to the base ground plane.
    """
    surface = env.z_gnd
    for k, box in enumerate(env.obstacles):
        top = float(box.max[2])
        if top <= z + snap and top > surface and box.footprint_contains(x, y):
            surface = top
    return surface


# ---------------------------------------------------------------------------
# node sampling
# ---------------------------------------------------------------------------

def sample_walking_node(env: EnvironmentMap, rng: np.random.Generator,
                        max_attempts: int = 100) -> Vec3:
    """Uniform sample over the bounds footprint, placed on the local
    supporting surface, rejected until the robot clearance sphere is free."""
    lo, hi = env.bounds.min, env.bounds.max
    for _ in range(max_attempts):
        x = rng.uniform(lo[0], hi[0])
        y = rng.uniform(lo[1], hi[1])
        z = walkable_height(env, x, y)
        if z is None:
            continue
        return vec3(x, y, z)
    raise SamplingBudgetError(
        f"no free walking node found in {max_attempts} attempts; "
        "environment is over-constrained")


def sample_flying_node(env: EnvironmentMap, rng: np.random.Generator,
                       max_attempts: int = 100) -> Vec3:
    """Uniform sample of the flyable volume: z in (z_gnd + eps_air, z_max],
    clearance sphere free of obstacles."""
    lo, hi = env.bounds.min, env.bounds.max
    z_lo = env.z_gnd + env.eps_air
    if z_lo >= hi[2]:
        raise SamplingBudgetError("no flyable altitude band inside bounds")
    for _ in range(max_attempts):
        x = rng.uniform(lo[0], hi[0])
        y = rng.uniform(lo[1], hi[1])
        z = rng.uniform(z_lo, hi[2])
        p = vec3(x, y, z)
        if is_point_free(env, p, margin=env.robot_radius):
            return p
    raise SamplingBudgetError(
        f"no free flying node found in {max_attempts} attempts; "
        "environment is over-constrained")
