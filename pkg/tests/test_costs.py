import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmloco.planner.costs import (
    CostModel,
    fly_edge_cost,
    heuristic_cost,
    transition_cost,
    transition_edge_cost,
    walk_edge_cost,
)


def test_defaults_valid():
    m = CostModel()
    assert m.fly_per_m == pytest.approx(m.P_f / m.v_f)


def test_validation_rejects_uneconomic_models():
    with pytest.raises(ValueError):
        CostModel(P_f=40.0, v_f=1.0)   # hover power cannot lift the weight
    with pytest.raises(ValueError):
        CostModel(c_walk_per_m=500.0)  # walking dearer than any flight path
    with pytest.raises(ValueError):
        CostModel(m=-1.0)


def test_walk_cost_linear():
    m = CostModel()
    assert walk_edge_cost(2.0, m) == pytest.approx(2.0 * m.c_walk_per_m)
    assert walk_edge_cost(0.0, m) == 0.0


def test_fly_cost_directional():
    m = CostModel()
    up = fly_edge_cost(np.hypot(3.0, 2.0), 1.0, 3.0, m)
    down = fly_edge_cost(np.hypot(3.0, 2.0), 3.0, 1.0, m)
    assert up > down
    # climb surcharge / descent credit are symmetric about the level cost
    level = fly_edge_cost(np.hypot(3.0, 2.0), 2.0, 2.0, m)
    assert up - level == pytest.approx(level - down)
    assert down >= 0.0


def test_transition_edge_includes_morph_and_flight():
    m = CostModel()
    assert transition_cost(m) == m.C_t
    c = transition_edge_cost(0.5, 0.0, 1.5, m)
    assert c > m.C_t
    assert c == pytest.approx(m.C_t + walk_edge_cost(0.5, m)
                              + fly_edge_cost(1.5, 0.0, 1.5, m))


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.0, 30.0), st.floats(0.0, 30.0),
    st.floats(0.0, 6.0), st.floats(0.0, 6.0), st.floats(0.0, 6.0))
def test_fly_cost_triangle_inequality(d1, d2, z1, z2, z3):
    m = CostModel()
    ab = fly_edge_cost(np.hypot(d1, z2 - z1), z1, z2, m)
    bc = fly_edge_cost(np.hypot(d2, z3 - z2), z2, z3, m)
    ac = fly_edge_cost(np.hypot(d1 + d2, z3 - z1), z1, z3, m)
    assert ac <= ab + bc + 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 50.0), st.floats(-5.0, 5.0))
def test_heuristic_below_both_modes(dh, dz):
    m = CostModel()
    pos = np.array([0.0, 0.0, 0.0])
    goal = np.array([dh, 0.0, dz])
    h = heuristic_cost(pos, goal, m)
    d = float(np.hypot(dh, dz))
    assert h <= fly_edge_cost(d, 0.0, dz, m) + 1e-9
    if abs(dz) < 1e-12:
        assert h <= walk_edge_cost(dh, m) + 1e-9
    assert h >= 0.0


def test_costs_nonnegative_for_steep_descent():
    m = CostModel()
    # descent credit never drives an edge cost negative
    assert fly_edge_cost(5.0, 5.0, 0.0, m) >= 0.0
    assert fly_edge_cost(100.0, 100.0, 0.0, m) >= 0.0


def test_model_is_frozen():
    m = CostModel()
    with pytest.raises(dataclasses.FrozenInstanceError):
        m.P_f = 100.0
