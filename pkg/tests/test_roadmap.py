import numpy as np
import pytest

from mmloco.geometry import (
    is_point_free,
    segment_clear,
    walkable_height,
)
from mmloco.planner import (
    CostModel,
    EdgeKind,
    ModeTag,
    PRMConfig,
    build_mm_prm,
    build_uniform_grid,
    connect_endpoint_flights,
    insert_node,
)
from mmloco.planner.roadmap import GridTooLargeError


CFG = PRMConfig(N_w=40, N_f=40, R=4.0, seed=5)


def test_node_counts_exact(boxy_env):
    g = build_mm_prm(boxy_env, CFG)
    assert g.n_nodes == CFG.N_w + CFG.N_f
    assert int(np.sum(g.mode == ModeTag.Walking)) == CFG.N_w
    assert int(np.sum(g.mode == ModeTag.Flying)) == CFG.N_f


def test_build_is_deterministic(boxy_env):
    a = build_mm_prm(boxy_env, CFG)
    b = build_mm_prm(boxy_env, CFG)
    assert np.array_equal(a.pos, b.pos)
    assert np.array_equal(a.ea, b.ea)
    assert np.array_equal(a.cost_ab, b.cost_ab)
    c = build_mm_prm(boxy_env, PRMConfig(N_w=40, N_f=40, R=4.0, seed=6))
    assert not np.array_equal(a.pos, c.pos)


def test_nodes_respect_mode_subspaces(boxy_env):
    g = build_mm_prm(boxy_env, CFG)
    for i in range(g.n_nodes):
        p = g.pos[i]
        if g.mode[i] == ModeTag.Walking:
            assert walkable_height(boxy_env, p[0], p[1]) == pytest.approx(p[2])
        else:
            assert p[2] > boxy_env.z_gnd + boxy_env.eps_air - 1e-9
            assert is_point_free(boxy_env, p, margin=boxy_env.robot_radius)


def test_edges_collision_free_and_typed(boxy_env):
    g = build_mm_prm(boxy_env, CFG)
    assert g.n_edges > 0
    for j in range(g.n_edges):
        a, b = g.ea[j], g.eb[j]
        pa, pb = g.pos[a], g.pos[b]
        kind = EdgeKind(int(g.kind[j]))
        ma, mb = ModeTag(int(g.mode[a])), ModeTag(int(g.mode[b]))
        assert np.linalg.norm(pb - pa) <= CFG.R + 1e-9
        if kind == EdgeKind.Walk:
            assert ma == mb == ModeTag.Walking
            assert abs(pa[2] - pb[2]) <= 1e-9    # level-ground edges only
        elif kind == EdgeKind.Fly:
            assert ma == mb == ModeTag.Flying
        else:
            assert {ma, mb} == {ModeTag.Walking, ModeTag.Flying}
            assert np.linalg.norm((pb - pa)[:2]) <= CFG.r_transition + 1e-9
        assert segment_clear(boxy_env, pa, pb)
        assert g.cost_ab[j] >= 0 and g.cost_ba[j] >= 0


def test_insert_node_snaps_and_connects(boxy_env):
    g = build_mm_prm(boxy_env, CFG)
    g2, i = insert_node(g, boxy_env, np.array([1.0, 1.0, 0.3]),
                        ModeTag.Walking, CFG)
    assert g2.n_nodes == g.n_nodes + 1
    assert g2.pos[i][2] == 0.0              # snapped onto the surface
    indptr, dst, _, _ = g2.csr()
    assert indptr[i + 1] > indptr[i]        # connected to neighbors


def test_insert_node_rejects_blocked_point(boxy_env):
    g = build_mm_prm(boxy_env, CFG)
    with pytest.raises(ValueError):
        insert_node(g, boxy_env, np.array([5.0, 7.75, 0.0]),
                    ModeTag.Walking, CFG)


def test_endpoint_flight_augmentation(boxy_env):
    g = build_mm_prm(boxy_env, CFG)
    g, s = insert_node(g, boxy_env, np.array([1.0, 1.0, 0.0]),
                       ModeTag.Walking, CFG)
    g, t = insert_node(g, boxy_env, np.array([9.0, 1.0, 0.0]),
                       ModeTag.Walking, CFG)
    g2 = connect_endpoint_flights(g, boxy_env, [s, t], CFG)
    # the endpoints gain transition edges to flying nodes
    kinds = g2.kind[(g2.ea == s) | (g2.eb == s)]
    assert np.any(kinds == EdgeKind.Transition)


def test_uniform_grid_denser_than_prm(boxy_env):
    g = build_mm_prm(boxy_env, CFG)
    grid = build_uniform_grid(boxy_env, 0.5)
    assert grid.n_nodes > g.n_nodes
    # grid walking nodes sit on supporting surfaces
    walk = grid.mode == ModeTag.Walking
    for p in grid.pos[walk][:50]:
        assert walkable_height(boxy_env, p[0], p[1]) == pytest.approx(p[2])


def test_uniform_grid_guards_node_count(boxy_env):
    with pytest.raises(GridTooLargeError):
        build_uniform_grid(boxy_env, 0.01)
    with pytest.raises(ValueError):
        build_uniform_grid(boxy_env, -0.5)


def test_transition_edges_cost_more_than_morph(boxy_env):
    model = CostModel()
    g = build_mm_prm(boxy_env, CFG, model)
    trans = g.kind == EdgeKind.Transition
    assert np.all(g.cost_ab[trans] >= model.C_t - 1e-9)
