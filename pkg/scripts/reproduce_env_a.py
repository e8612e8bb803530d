#!/usr/bin/env python3
"""End-to-end reproduction of the headline env-A result.

Calibrates the cost model from closed-loop rollouts, plans the env-A
mission with the calibrated constants, compares against the flight-only
alternative, and executes the plan on the reduced-order model.  All
artifacts land in the output directory (default ./out_env_a).
"""

import argparse
import json
import sys
from pathlib import Path

from mmloco import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out_env_a")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-simulate", action="store_true",
                    help="stop after planning (simulation takes ~2 min)")
    args = ap.parse_args()
    out = Path(args.out)

    common = ["--scenario", "env_a", "--seed", str(args.seed),
              "--out", str(out)]
    print("== calibrate ==")
    if cli.main(["calibrate"] + common) != 0:
        return 1
    model = json.loads((out / "cost_model.json").read_text())["cost_model"]
    print(f"c_walk_per_m = {model['c_walk_per_m']:.2f} J/m, "
          f"C_t = {model['C_t']:.2f} J")

    print("== plan ==")
    if cli.main(["plan"] + common) != 0:
        return 1
    report = json.loads((out / "report.json").read_text())
    plan, fly = report["plan"], report["flight_only"]
    print(f"multi-modal {plan['total_cost_J']:.1f} J "
          f"({plan['n_transitions']} transformations) vs flight-only "
          f"{fly['total_cost_J']:.1f} J -> ratio "
          f"{fly['multi_modal_ratio']:.3f}")

    if args.skip_simulate:
        return 0
    print("== simulate ==")
    rc = cli.main(["simulate"] + common)
    ledger = json.loads((out / "ledger.json").read_text())["result"]
    print(f"success={ledger['success']} final_error="
          f"{ledger['final_error_m']:.3f} m realized="
          f"{ledger['total_realized_J']:.1f} J planned="
          f"{ledger['total_planned_J']:.1f} J")
    return rc


if __name__ == "__main__":
    sys.exit(main())
