"""Command-line interface.

Subcommands share a common flag set::

    mmloco <plan|simulate|compare|calibrate>
        --scenario <file-or-bundled-name> --seed <u64> --out <dir>
        [--hi-fi-edges] [--grid <spacing_m>]

* ``plan``      builds the multi-modal roadmap, searches it, and writes
  ``roadmap.json``, ``plan.json`` and ``report.json``.
* ``simulate``  executes ``plan.json`` from the output directory on the
  reduced-order model (planning first when absent) and writes
  ``trajectory.csv``, ``ledger.json`` and ``report.json``.
* ``compare``   builds both the sampled roadmap and the uniform-grid
  baseline and writes a side-by-side ``compare.json`` / ``report.json``.
* ``calibrate`` fits the cost-model constants from closed-loop rollouts
  and writes ``cost_model.json``.

All JSON artifacts are byte-deterministic for a fixed seed; wall-clock
measurements are confined to ``timings.json`` so the other artifacts can be
compared byte-for-byte across runs.  If ``cost_model.json`` exists in the
output directory (e.g. written by ``calibrate``), ``plan``, ``simulate`` and
``compare`` pick it up as the base cost model before scenario overrides.

Exit codes: 0 success, 1 input error, 2 goal unreachable, 3 mission failure.
``MMLOCO_LOG`` selects the log level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from mmloco import __version__
from mmloco.calibrate import calibrate, load_cost_model, write_cost_model
from mmloco.geometry import walkable_height
from mmloco.planner import (
    CostModel,
    EdgeKind,
    GridTooLargeError,
    MissionPlan,
    ModeTag,
    PRMConfig,
    RoadmapGraph,
    Unreachable,
    astar,
    build_mm_prm,
    build_uniform_grid,
    connect_endpoint_flights,
    flight_only_cost,
    insert_node,
)
from mmloco.scenario import (
    Scenario,
    ScenarioError,
    bundled_scenario_path,
    load_scenario,
)
from mmloco.sim import MissionParams, run_mission
from mmloco.sim.mission import write_ledger_json, write_trajectory_csv

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNREACHABLE = 2
EXIT_MISSION = 3

COLOCATED_TOL = 1e-9

log = logging.getLogger("mmloco")


def _setup_logging() -> None:
    level = os.environ.get("MMLOCO_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _resolve_scenario(arg: str) -> Scenario:
    """Load a scenario from a path, falling back to the bundled set."""
    p = Path(arg)
    if not p.exists():
        bundled = bundled_scenario_path(p.stem)
        if bundled.exists():
            p = bundled
        else:
            raise ScenarioError(f"scenario file not found: {arg}")
    return load_scenario(p)


def _param_hash(sc: Scenario, config: PRMConfig, model: CostModel) -> str:
    """Stable digest of everything that determines the planner's output."""
    doc = {
        "bounds": [sc.env.bounds.min.tolist(), sc.env.bounds.max.tolist()],
        "z_gnd": sc.env.z_gnd,
        "obstacles": [[o.min.tolist(), o.max.tolist(), o.walkable_top]
                      for o in sc.env.obstacles],
        "start": sc.start.tolist(),
        "goal": sc.goal.tolist(),
        "planner": dataclasses.asdict(config),
        "grid_spacing": sc.grid_spacing,
        "cost_model": dataclasses.asdict(model),
    }
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _graph_stats(g: RoadmapGraph) -> dict:
    kinds = np.asarray(g.kind)
    return {
        "n_nodes": g.n_nodes,
        "n_walking": int(np.sum(g.mode == ModeTag.Walking)),
        "n_flying": int(np.sum(g.mode == ModeTag.Flying)),
        "n_edges": g.n_edges,
        "n_walk_edges": int(np.sum(kinds == EdgeKind.Walk)),
        "n_fly_edges": int(np.sum(kinds == EdgeKind.Fly)),
        "n_transition_edges": int(np.sum(kinds == EdgeKind.Transition)),
    }


def _base_model(sc: Scenario, out: Path) -> CostModel:
    cm_file = out / "cost_model.json"
    if cm_file.exists():
        log.info("using calibrated cost model from %s", cm_file)
        return sc.cost_model(load_cost_model(cm_file))
    return sc.cost_model()


def _endpoint_plan(sc: Scenario, config: PRMConfig,
                   model: CostModel) -> tuple[RoadmapGraph, MissionPlan,
                                              float, dict]:
    """Build the roadmap, insert the endpoints, and search.

    Returns (graph, plan, flight_only_cost, timings).  Raises ``Unreachable``
    when either endpoint cannot be connected or no route exists.
    """
    timings = {}
    t0 = time.perf_counter()
    g = build_mm_prm(sc.env, config, model)
    timings["build_roadmap_s"] = time.perf_counter() - t0

    try:
        g, s = insert_node(g, sc.env, sc.start, ModeTag.Walking, config, model)
        g, t = insert_node(g, sc.env, sc.goal, ModeTag.Walking, config, model)
    except ValueError as exc:
        raise Unreachable(f"endpoint cannot be connected: {exc}") from exc
    g = connect_endpoint_flights(g, sc.env, [s, t], config, model)

    t0 = time.perf_counter()
    plan = astar(g, s, t, model)
    timings["search_s"] = time.perf_counter() - t0
    try:
        fly = flight_only_cost(g, s, t)
    except Unreachable:
        fly = float("nan")
    return g, plan, fly, timings


def _trivial_plan(sc: Scenario) -> MissionPlan:
    z = walkable_height(sc.env, sc.start[0], sc.start[1])
    if z is None:
        raise Unreachable("start position is not walkable")
    p = np.array([[sc.start[0], sc.start[1], z]])
    return MissionPlan(node_ids=[0], positions=p, modes=[ModeTag.Walking],
                       edge_kinds=[], edge_costs=[], total_cost=0.0)


def _hi_fi_recost(plan: MissionPlan, model: CostModel) -> MissionPlan:
    """Replace the planned Walk-edge costs of the final path with energies
    from straight governed rollouts of the same length."""
    from mmloco.calibrate import walk_rollout

    cache: dict[float, float] = {}
    costs = list(plan.edge_costs)
    for j, kind in enumerate(plan.edge_kinds):
        if kind != EdgeKind.Walk:
            continue
        d = float(np.linalg.norm(plan.positions[j + 1] - plan.positions[j]))
        key = round(d, 3)
        if key not in cache:
            log.info("hi-fi rollout for a %.2f m walk edge", d)
            rlog = walk_rollout(d, model=model)
            if not rlog.success:
                raise RuntimeError(
                    f"hi-fi edge rollout failed: {rlog.fail_reason}")
            cache[key] = rlog.total_realized
        costs[j] = cache[key]
    return MissionPlan(node_ids=plan.node_ids, positions=plan.positions,
                       modes=plan.modes, edge_kinds=plan.edge_kinds,
                       edge_costs=costs, total_cost=float(sum(costs)))


def _plan_to_out(sc: Scenario, args, out: Path) -> int:
    model = _base_model(sc, out)
    config = dataclasses.replace(sc.planner, seed=args.seed)
    phash = _param_hash(sc, config, model)

    if np.linalg.norm(sc.goal - sc.start) < COLOCATED_TOL:
        plan = _trivial_plan(sc)
        graph_stats = {"n_nodes": 0, "n_edges": 0}
        fly = 0.0
        timings = {}
        _write_json(out / "roadmap.json", {"nodes": [], "edges": []})
    else:
        g, plan, fly, timings = _endpoint_plan(sc, config, model)
        if args.hi_fi_edges:
            t0 = time.perf_counter()
            plan = _hi_fi_recost(plan, model)
            timings["hi_fi_recost_s"] = time.perf_counter() - t0
        graph_stats = _graph_stats(g)
        _write_json(out / "roadmap.json", g.to_dict())

    plan_doc = plan.to_dict()
    plan_doc["seed"] = args.seed
    plan_doc["param_hash"] = phash
    _write_json(out / "plan.json", plan_doc)

    report = {
        "command": "plan",
        "version": __version__,
        "seed": args.seed,
        "param_hash": phash,
        "roadmap": graph_stats,
        "plan": {
            "total_cost_J": round(plan.total_cost, 6),
            "n_waypoints": len(plan.node_ids),
            "n_transitions": plan.n_transitions,
            "modes": "".join(m.name[0] for m in plan.modes),
            "hi_fi_edges": bool(args.hi_fi_edges),
        },
        "flight_only": {
            "total_cost_J": round(fly, 6) if np.isfinite(fly) else None,
            "multi_modal_ratio": round(plan.total_cost / fly, 6)
            if np.isfinite(fly) and fly > 0 else None,
        },
    }
    _write_json(out / "report.json", report)
    _write_json(out / "timings.json",
                {k: round(v, 3) for k, v in timings.items()})
    log.info("plan cost %.1f J (%d transitions), flight-only %.1f J",
             plan.total_cost, plan.n_transitions, fly)
    return EXIT_OK


def cmd_plan(args) -> int:
    sc = _resolve_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return _plan_to_out(sc, args, out)


def cmd_simulate(args) -> int:
    sc = _resolve_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = _base_model(sc, out)

    plan_file = out / "plan.json"
    if not plan_file.exists():
        log.info("no plan.json in %s; planning first", out)
        rc = _plan_to_out(sc, args, out)
        if rc != EXIT_OK:
            return rc
    with open(plan_file) as f:
        plan = MissionPlan.from_dict(json.load(f))

    mp = MissionParams(seed=args.seed)
    t0 = time.perf_counter()
    mlog = run_mission(plan, sc.env, model, mp)
    wall = time.perf_counter() - t0

    write_trajectory_csv(mlog, out / "trajectory.csv")
    write_ledger_json(mlog, out / "ledger.json")
    report = {
        "command": "simulate",
        "version": __version__,
        "seed": args.seed,
        "param_hash": _param_hash(
            sc, dataclasses.replace(sc.planner, seed=args.seed), model),
        "success": mlog.success,
        "failed_waypoint": mlog.fail_index,
        "fail_reason": mlog.fail_reason,
        "final_error_m": round(mlog.final_error, 6),
        "duration_s": round(mlog.duration, 6),
        "n_transforms": mlog.n_transforms,
        "total_planned_J": round(mlog.total_planned, 6),
        "total_realized_J": round(mlog.total_realized, 6),
        "min_h_w": round(float(mlog.min_h_w), 9)
        if np.isfinite(mlog.min_h_w) else None,
    }
    _write_json(out / "report.json", report)
    _write_json(out / "timings.json", {"simulate_s": round(wall, 3)})
    if not mlog.success:
        log.error("mission failed at waypoint %s: %s",
                  mlog.fail_index, mlog.fail_reason)
        return EXIT_MISSION
    log.info("mission succeeded: %.3f m final error, %.1f J realized",
             mlog.final_error, mlog.total_realized)
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = _resolve_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = _base_model(sc, out)
    config = dataclasses.replace(sc.planner, seed=args.seed)
    spacing = args.grid if args.grid is not None else sc.grid_spacing
    if spacing <= 0:
        raise ScenarioError("--grid spacing must be positive")

    g_prm, plan_prm, _, timings = _endpoint_plan(sc, config, model)

    t0 = time.perf_counter()
    g_grid = build_uniform_grid(sc.env, spacing, model, config.r_transition)
    timings["build_grid_s"] = time.perf_counter() - t0
    try:
        g_grid, s = insert_node(g_grid, sc.env, sc.start, ModeTag.Walking,
                                config, model)
        g_grid, t = insert_node(g_grid, sc.env, sc.goal, ModeTag.Walking,
                                config, model)
    except ValueError as exc:
        raise Unreachable(f"endpoint cannot be connected: {exc}") from exc
    g_grid = connect_endpoint_flights(g_grid, sc.env, [s, t], config, model)
    t0 = time.perf_counter()
    plan_grid = astar(g_grid, s, t, model)
    timings["grid_search_s"] = time.perf_counter() - t0

    stats_prm = _graph_stats(g_prm)
    stats_grid = _graph_stats(g_grid)
    doc = {
        "command": "compare",
        "version": __version__,
        "seed": args.seed,
        "param_hash": _param_hash(sc, config, model),
        "grid_spacing_m": spacing,
        "prm": {**stats_prm,
                "plan_cost_J": round(plan_prm.total_cost, 6),
                "n_transitions": plan_prm.n_transitions},
        "grid": {**stats_grid,
                 "plan_cost_J": round(plan_grid.total_cost, 6),
                 "n_transitions": plan_grid.n_transitions},
        "ratios": {
            "nodes": round(stats_grid["n_nodes"]
                           / max(stats_prm["n_nodes"], 1), 3),
            "edges": round(stats_grid["n_edges"]
                           / max(stats_prm["n_edges"], 1), 3),
            "cost": round(plan_prm.total_cost
                          / max(plan_grid.total_cost, 1e-12), 6),
        },
    }
    _write_json(out / "compare.json", doc)
    _write_json(out / "report.json", doc)
    _write_json(out / "timings.json",
                {k: round(v, 3) for k, v in timings.items()})
    log.info("PRM %d nodes / %d edges vs grid %d / %d",
             stats_prm["n_nodes"], stats_prm["n_edges"],
             stats_grid["n_nodes"], stats_grid["n_edges"])
    return EXIT_OK


def cmd_calibrate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = CostModel()
    if args.scenario is not None:
        base = _resolve_scenario(args.scenario).cost_model()
    t0 = time.perf_counter()
    model, provenance = calibrate(base, seed=args.seed)
    wall = time.perf_counter() - t0
    write_cost_model(out / "cost_model.json", model, provenance)
    _write_json(out / "timings.json", {"calibrate_s": round(wall, 3)})
    log.info("calibrated c_walk_per_m=%.2f J/m, C_t=%.2f J",
             model.c_walk_per_m, model.C_t)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mmloco",
        description="Energy-optimal multi-modal locomotion planning and "
                    "reduced-order mission simulation.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenario_required=True):
        p.add_argument("--scenario", required=scenario_required,
                       help="scenario JSON file or bundled name "
                            "(env_a, env_b, env_c)")
        p.add_argument("--seed", type=int, default=0,
                       help="64-bit master seed (default 0)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--hi-fi-edges", action="store_true",
                       help="recost the final path's walk edges with "
                            "closed-loop rollouts")
        p.add_argument("--grid", type=float, default=None, metavar="M",
                       help="uniform-grid spacing override in meters")

    common(sub.add_parser("plan", help="build a roadmap and search it"))
    common(sub.add_parser("simulate",
                          help="execute the plan on the reduced-order model"))
    common(sub.add_parser("compare",
                          help="compare the sampled roadmap against a "
                               "uniform grid"))
    common(sub.add_parser("calibrate",
                          help="fit cost-model constants from rollouts"),
           scenario_required=False)
    return ap


_DISPATCH = {
    "plan": cmd_plan,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "calibrate": cmd_calibrate,
}


def main(argv=None) -> int:
    _setup_logging()
    ap = _build_parser()
    args = ap.parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be a 64-bit unsigned integer",
              file=sys.stderr)
        return EXIT_INPUT
    try:
        return _DISPATCH[args.command](args)
    except (ScenarioError, GridTooLargeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Unreachable as exc:
        print(f"unreachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE


if __name__ == "__main__":
    sys.exit(main())
