"""Reproduce the paper-style experiment sweeps and write one CSV per axis.

Usage:
    python scripts/run_experiments.py --axis robots --trials 100 --out results/
    python scripts/run_experiments.py --axis all --trials 30 --workers 2

Axes: robots (outage/feasibility vs fleet size, with the no-RIS baseline),
delay (reconfiguration delay), k-window (outage budget), sinr (quality
threshold), capacity (robots served concurrently per surface).
"""

import argparse
import os
from dataclasses import replace

from rislink import harness
from rislink.scenario import ScenarioConfig

BASE = ScenarioConfig(
    n_bs=2, n_ris=8, n_slots=50,
    psi_range=(9.0, 10.0), k_range=(14, 15),
    d_reconfig=2, u_override=2,
)

AXES = {
    "robots": dict(axis="robots", values=[8, 10, 12, 14],
                   methods=("ilp", "heuristic", "no-ris")),
    "delay": dict(axis="delay", values=[1, 2, 3, 4],
                  base=replace(BASE, n_robots=12)),
    "k-window": dict(axis="k_window", values=[(4, 5), (7, 8), (9, 10), (14, 15)],
                     base=replace(BASE, n_robots=12)),
    "sinr": dict(axis="sinr_threshold", values=[(9, 10), (29, 30), (49, 50), (69, 70)],
                 base=replace(BASE, n_robots=12)),
    "capacity": dict(axis="capacity", values=[1, 2, 3],
                     base=replace(BASE, n_robots=14)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--axis", choices=list(AXES) + ["all"], default="all")
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed0", type=int, default=1000)
    ap.add_argument("--timeout", type=float, default=600.0)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    names = list(AXES) if args.axis == "all" else [args.axis]
    for name in names:
        params = dict(AXES[name])
        spec = harness.SweepSpec(
            base=params.pop("base", BASE),
            methods=params.pop("methods", ("ilp", "heuristic")),
            trials=args.trials,
            seed0=args.seed0,
            timeout=args.timeout,
            workers=args.workers,
            **params,
        )
        table = harness.run_sweep(spec)
        path = os.path.join(args.out, f"sweep_{name}.csv")
        with open(path, "w") as fh:
            fh.write(harness.sweep_to_csv(table))
        print(f"{name}: wrote {path}")


if __name__ == "__main__":
    main()
