#!/usr/bin/env python3
"""Energy-saving sweep over random box-obstacle scenarios.

Plans each seeded random scenario twice -- multi-modal and flight-only --
and prints the cost ratio distribution.  Use a calibrated cost-model file
(from ``mmloco calibrate``) to reproduce the headline ratios.
"""

import argparse
import sys

import numpy as np

from mmloco.calibrate import load_cost_model
from mmloco.planner import (
    CostModel,
    ModeTag,
    Unreachable,
    astar,
    build_mm_prm,
    connect_endpoint_flights,
    flight_only_cost,
    insert_node,
)
from mmloco.scenario import random_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--seed0", type=int, default=1000)
    ap.add_argument("--cost-model", default=None,
                    help="path to a calibrated cost_model.json")
    args = ap.parse_args()
    model = load_cost_model(args.cost_model) if args.cost_model \
        else CostModel()

    ratios = []
    for k in range(args.n):
        sc = random_scenario(args.seed0 + k)
        cfg = sc.planner
        g = build_mm_prm(sc.env, cfg, model)
        g, s = insert_node(g, sc.env, sc.start, ModeTag.Walking, cfg, model)
        g, t = insert_node(g, sc.env, sc.goal, ModeTag.Walking, cfg, model)
        g = connect_endpoint_flights(g, sc.env, [s, t], cfg, model)
        mm = astar(g, s, t, model).total_cost
        try:
            fly = flight_only_cost(g, s, t)
        except Unreachable:
            print(f"seed {args.seed0 + k}: no flight-only route")
            continue
        ratios.append(mm / fly)
        print(f"seed {args.seed0 + k}: multi-modal {mm:8.1f} J, "
              f"flight-only {fly:8.1f} J, ratio {mm / fly:.3f}")

    r = np.array(ratios)
    print(f"\n{r.size} scenarios: ratio min {r.min():.3f} / median "
          f"{np.median(r):.3f} / max {r.max():.3f}; "
          f"multi-modal never worse: {bool(np.all(r <= 1.0 + 1e-12))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
