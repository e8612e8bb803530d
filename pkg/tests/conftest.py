import json

import numpy as np
import pytest

from mmloco.geometry import Box3, EnvironmentMap


@pytest.fixture
def flat_env() -> EnvironmentMap:
    return EnvironmentMap(Box3(np.zeros(3), np.array([12.0, 10.0, 6.0])), 0.0,
                          [])


@pytest.fixture
def boxy_env() -> EnvironmentMap:
    """Small world with one walkable block and one solid wall."""
    bounds = Box3(np.zeros(3), np.array([10.0, 10.0, 5.0]))
    obstacles = [
        Box3(np.array([4.0, 4.0, 0.0]), np.array([6.0, 6.0, 1.0]),
             walkable_top=True),
        Box3(np.array([2.0, 7.5, 0.0]), np.array([8.0, 8.0, 3.0])),
    ]
    return EnvironmentMap(bounds, 0.0, obstacles)


def small_scenario_doc(**overrides) -> dict:
    """An 8x6 m walk-only scenario that plans and simulates quickly."""
    doc = {
        "bounds": {"min": [0, 0, 0], "max": [8, 6, 4]},
        "z_gnd": 0.0,
        "obstacles": [
            {"min": [3.5, 0.0, 0.0], "max": [4.5, 3.5, 2.0]},
        ],
        "start": [1.0, 1.0, 0.0],
        "goal": [7.0, 1.0, 0.0],
        "planner": {"N_w": 60, "N_f": 40, "R": 4.0},
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def small_scenario_file(tmp_path):
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(small_scenario_doc()))
    return p
