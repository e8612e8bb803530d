#!/usr/bin/env python3
"""Sampled-roadmap vs uniform-grid discretization benchmark.

For each bundled scenario, builds the MM-PRM and the uniform grid at the
scenario's grid spacing and prints node/edge counts, build wall times and
optimal path costs side by side.
"""

import argparse
import sys
import time

from mmloco.planner import (
    CostModel,
    ModeTag,
    astar,
    build_mm_prm,
    build_uniform_grid,
    connect_endpoint_flights,
    insert_node,
)
from mmloco.scenario import bundled_scenario


def plan_on(graph, sc, cfg, model):
    graph, s = insert_node(graph, sc.env, sc.start, ModeTag.Walking, cfg,
                           model)
    graph, t = insert_node(graph, sc.env, sc.goal, ModeTag.Walking, cfg,
                           model)
    graph = connect_endpoint_flights(graph, sc.env, [s, t], cfg, model)
    return astar(graph, s, t, model)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenarios", nargs="*",
                    default=["env_a", "env_b", "env_c"])
    ap.add_argument("--grid", type=float, default=None,
                    help="grid spacing override in meters")
    args = ap.parse_args()
    model = CostModel()

    header = (f"{'scenario':<8} {'method':<5} {'nodes':>7} {'edges':>8} "
              f"{'build_s':>8} {'cost_J':>10}")
    print(header)
    print("-" * len(header))
    for name in args.scenarios:
        sc = bundled_scenario(name)
        spacing = args.grid if args.grid is not None else sc.grid_spacing

        t0 = time.perf_counter()
        prm = build_mm_prm(sc.env, sc.planner, model)
        t_prm = time.perf_counter() - t0
        cost_prm = plan_on(prm, sc, sc.planner, model).total_cost

        t0 = time.perf_counter()
        grid = build_uniform_grid(sc.env, spacing, model,
                                  sc.planner.r_transition)
        t_grid = time.perf_counter() - t0
        cost_grid = plan_on(grid, sc, sc.planner, model).total_cost

        print(f"{name:<8} {'prm':<5} {prm.n_nodes:>7} {prm.n_edges:>8} "
              f"{t_prm:>8.2f} {cost_prm:>10.1f}")
        print(f"{name:<8} {'grid':<5} {grid.n_nodes:>7} {grid.n_edges:>8} "
              f"{t_grid:>8.2f} {cost_grid:>10.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
