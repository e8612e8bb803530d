import numpy as np
import pytest

from mmloco.geometry import walkable_height
from mmloco.planner import CostModel
from mmloco.scenario import (
    ScenarioError,
    bundled_scenario,
    bundled_scenario_path,
    load_scenario,
    random_scenario,
    scenario_from_dict,
)
from conftest import small_scenario_doc


def test_load_small_scenario(small_scenario_file):
    sc = load_scenario(small_scenario_file)
    assert sc.planner.N_w == 60
    assert sc.env.z_gnd == 0.0
    np.testing.assert_array_equal(sc.goal, [7.0, 1.0, 0.0])


@pytest.mark.parametrize("name", ["env_a", "env_b", "env_c"])
def test_bundled_scenarios_load(name):
    sc = bundled_scenario(name)
    assert walkable_height(sc.env, sc.start[0], sc.start[1]) is not None
    assert walkable_height(sc.env, sc.goal[0], sc.goal[1]) is not None
    assert bundled_scenario_path(name).exists()


def test_missing_bundled_scenario():
    with pytest.raises(ScenarioError):
        bundled_scenario("env_z")


@pytest.mark.parametrize("mutation", [
    lambda d: d.pop("bounds"),
    lambda d: d.pop("start"),
    lambda d: d.__setitem__("start", [1.0, 2.0]),
    lambda d: d.__setitem__("start", [1.0, 2.0, float("nan")]),
    lambda d: d.__setitem__("obstacles", [{"min": [0, 0, 0]}]),
    lambda d: d.__setitem__("planner", {"R": -1.0}),
    lambda d: d.__setitem__("planner", {"grid_spacing": 0.0}),
    lambda d: d.__setitem__("cost_model", {"nonsense": 1.0}),
])
def test_schema_violations_raise(mutation):
    doc = small_scenario_doc()
    mutation(doc)
    with pytest.raises(ScenarioError):
        sc = scenario_from_dict(doc)
        sc.cost_model()  # override validation is deferred to use


def test_invalid_json_raises(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(p)
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.json")


def test_cost_overrides_applied():
    doc = small_scenario_doc(cost_model={"C_t": 123.0})
    sc = scenario_from_dict(doc)
    m = sc.cost_model(CostModel())
    assert m.C_t == 123.0
    assert m.P_f == CostModel().P_f


def test_random_scenarios_deterministic_and_solvable():
    a = random_scenario(11)
    b = random_scenario(11)
    np.testing.assert_array_equal(a.start, b.start)
    assert len(a.env.obstacles) == len(b.env.obstacles)
    for oa, ob in zip(a.env.obstacles, b.env.obstacles):
        np.testing.assert_array_equal(oa.min, ob.min)
    c = random_scenario(12)
    assert not np.array_equal(a.start, c.start)
    for sc in (a, c):
        assert walkable_height(sc.env, sc.start[0], sc.start[1]) is not None
        assert walkable_height(sc.env, sc.goal[0], sc.goal[1]) is not None
