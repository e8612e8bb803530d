"""Scenario files: environment geometry plus mission endpoints and optional
planner / cost-model overrides, in one JSON document.

Schema (units meters, right-handed frame, z up)::

    {
      "bounds": {"min": [x,y,z], "max": [x,y,z]},
      "z_gnd": 0.0,
      "obstacles": [{"min": [...], "max": [...], "walkable_top": true}, ...],
      "start": [x,y,z],
      "goal":  [x,y,z],
      "planner":    {"R": 4.0, "N_w": 300, "N_f": 300,
                     "grid_spacing": 0.25},        # optional
      "cost_model": {"c_walk_per_m": ..., ...}     # optional overrides
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from mmloco.geometry import Box3, EnvironmentMap
from mmloco.planner import CostModel, PRMConfig


class ScenarioError(ValueError):
    """The scenario file is malformed or violates an invariant."""


@dataclass
class Scenario:
    env: EnvironmentMap
    start: np.ndarray
    goal: np.ndarray
    planner: PRMConfig = field(default_factory=PRMConfig)
    grid_spacing: float = 0.25
    cost_overrides: dict = field(default_factory=dict)

    def cost_model(self, base: CostModel | None = None) -> CostModel:
        """Base model with the scenario's overrides applied."""
        from dataclasses import asdict, replace
        base = base or CostModel()
        fields = asdict(base)
        unknown = set(self.cost_overrides) - set(fields)
        if unknown:
            raise ScenarioError(f"unknown cost_model keys: {sorted(unknown)}")
        return replace(base, **self.cost_overrides)


def _vec3(obj, name) -> np.ndarray:
    try:
        v = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{name} must be a 3-vector") from exc
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ScenarioError(f"{name} must be a finite 3-vector")
    return v


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    for key in ("bounds", "z_gnd", "obstacles", "start", "goal"):
        if key not in doc:
            raise ScenarioError(f"missing required key: {key}")

    b = doc["bounds"]
    if not isinstance(b, dict) or "min" not in b or "max" not in b:
        raise ScenarioError("bounds must be {min, max}")
    try:
        bounds = Box3(_vec3(b["min"], "bounds.min"),
                      _vec3(b["max"], "bounds.max"))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    obstacles = []
    for i, o in enumerate(doc["obstacles"]):
        if not isinstance(o, dict) or "min" not in o or "max" not in o:
            raise ScenarioError(f"obstacles[{i}] must be {{min, max[, "
                                f"walkable_top]}}")
        try:
            obstacles.append(Box3(_vec3(o["min"], f"obstacles[{i}].min"),
                                  _vec3(o["max"], f"obstacles[{i}].max"),
                                  walkable_top=bool(o.get("walkable_top",
                                                          False))))
        except ValueError as exc:
            raise ScenarioError(f"obstacles[{i}]: {exc}") from exc

    z_gnd = float(doc["z_gnd"])
    env = EnvironmentMap(bounds, z_gnd, obstacles)
    start = _vec3(doc["start"], "start")
    goal = _vec3(doc["goal"], "goal")

    p = doc.get("planner", {})
    grid_spacing = float(p.pop("grid_spacing", 0.25)) if isinstance(p, dict) \
        else 0.25
    if grid_spacing <= 0:
        raise ScenarioError("grid_spacing must be positive")
    try:
        planner = PRMConfig(**p)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"planner config: {exc}") from exc

    overrides = doc.get("cost_model", {})
    if not isinstance(overrides, dict):
        raise ScenarioError("cost_model must be an object")

    return Scenario(env, start, goal, planner, grid_spacing, dict(overrides))


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON in {path}: {exc}")
    return scenario_from_dict(doc)


def bundled_scenario(name: str) -> Scenario:
    """Load a bundled scenario ('env_a', 'env_b', 'env_c')."""
    ref = resources.files("mmloco.data").joinpath(f"{name}.json")
    try:
        doc = json.loads(ref.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return scenario_from_dict(doc)


def bundled_scenario_path(name: str) -> Path:
    return Path(str(resources.files("mmloco.data").joinpath(f"{name}.json")))


def random_scenario(seed: int, size: float = 20.0,
                    n_obstacles: tuple[int, int] = (3, 8)) -> Scenario:
    """Generate a solvable random box-obstacle scenario.

    Obstacles are drawn away from the start/goal corners so both endpoints
    stay walkable; geometry depends only on ``seed``.
    """
    from mmloco import rng as rng_mod
    from mmloco.geometry import walkable_height

    g = rng_mod.stream(seed, rng_mod.STREAM_SCENE)
    bounds = Box3(np.zeros(3), np.array([size, size, 6.0]))
    start = np.array([1.0 + g.uniform(0, 1), 1.0 + g.uniform(0, 1), 0.0])
    goal = np.array([size - 2.0 + g.uniform(0, 1),
                     size - 2.0 + g.uniform(0, 1), 0.0])
    obstacles = []
    n = int(g.integers(n_obstacles[0], n_obstacles[1]))
    while len(obstacles) < n:
        cx, cy = g.uniform(2.5, size - 2.5, 2)
        sx, sy = g.uniform(0.5, 2.5, 2)
        h = float(g.uniform(0.5, 3.0))
        box = Box3(np.array([max(0.0, cx - sx), max(0.0, cy - sy), 0.0]),
                   np.array([min(size, cx + sx), min(size, cy + sy), h]),
                   walkable_top=bool(g.integers(0, 2)))
        # keep the endpoints on open ground
        c = 0.5 * (box.min[:2] + box.max[:2])
        if (np.linalg.norm(c - start[:2]) < 3.0
                or np.linalg.norm(c - goal[:2]) < 3.0):
            continue
        obstacles.append(box)
    env = EnvironmentMap(bounds, 0.0, obstacles)
    assert walkable_height(env, *start[:2]) is not None
    assert walkable_height(env, *goal[:2]) is not None
    return Scenario(env, start, goal)
